//! Quantization-change expansion: rewriting a Weyl-quantized symbol as a
//! standard-quantized series with h-graded coefficient symbols.
//!
//! For a polynomial b the series terminates: Op_w(b) = Op(sum_j h^j b_j) with
//! b_j = ((-i/2) <d_x, d_xi>)^j / j!  applied to b. The scalar prefactor keeps
//! b_j alternating between real and imaginary coefficient polynomials.

use num_complex::Complex64;

use crate::symbol::{ComplexPolynomial, PolynomialSymbol};

/// One h-graded coefficient of the quantization change.
#[derive(Debug, Clone)]
pub struct GradedSymbol {
    /// Power of h carried by this coefficient.
    pub order: usize,
    pub symbol: ComplexPolynomial,
}

/// Expand a Weyl symbol into standard-quantization coefficients b_j; the
/// series is returned through exact termination (or `max_order`, whichever
/// comes first).
pub fn quantization_change_expansion(
    symbol: &PolynomialSymbol,
    max_order: usize,
) -> Vec<GradedSymbol> {
    let mut out = Vec::new();
    let mut current = symbol.clone();
    let mut factorial = 1.0f64;
    for j in 0..=max_order {
        if j > 0 {
            current = current.mixed_laplacian();
            factorial *= j as f64;
        }
        if current.is_zero() && j > 0 {
            break;
        }
        // (-i/2)^j / j!
        let phase = match j % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        let scale = phase * 0.5f64.powi(j as i32) / factorial;
        out.push(GradedSymbol {
            order: j,
            symbol: current.to_complex().scale(scale),
        });
        if current.is_zero() {
            break;
        }
    }
    out
}
