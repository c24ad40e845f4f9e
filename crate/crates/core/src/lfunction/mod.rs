//! Fourier series on the imaginary axis and the completed L-function.

mod eval;
mod gamma;
mod lstar;
mod quadrature;

pub use eval::{eval_form, eval_real_coeffs, EvalValue};
pub use gamma::{bernoulli, gamma_complete, gamma_upper};
pub use lstar::{
    brackets, functional_equation_residual, functional_equation_residuals, lstar_eigen, lstar_generic,
    lstar_generic_with, lstar_many, required_terms, scan_real, sigma_grid, sign_changes, EmbeddedForm, FeResidual,
    LValue, MellinKernel, Method, ScanPoint, ScanSign,
};
pub use quadrature::{integrand_samples, lstar_quadrature};
