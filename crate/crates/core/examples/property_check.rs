//! Sampled standard-interference checks on a good and a broken mapping.

use asymap::prelude::*;

fn main() -> Result<()> {
    let t = AffineMapping::new(
        Matrix::from_row_slice(2, 2, &[0.1, 0.4, 0.3, 0.2]),
        PositiveVector::new(vec![1.0, 0.5])?,
    )?;
    let r = check_standard_properties(&t, 1000, 7)?;
    println!("affine: {} violations in {} samples", r.violations.len(), r.samples);

    // linear without an offset: T(0) = 0 and alpha T(x) = T(alpha x)
    let linear = FnMapping::new(2, |x: &[f64]| vec![0.5 * x[1], 0.5 * x[0]]);
    let r = check_standard_properties(&linear, 1000, 7)?;
    println!(
        "linear: {} violations, first {:?}",
        r.violations.len(),
        r.violations.first().map(|v| v.coordinate)
    );

    let a = exact_asymptotic_affine(&t);
    let r = check_asymptotic_properties(&a, 1000, 7)?;
    println!("asymptotic homogeneity/monotonicity: passed = {}", r.passed());
    Ok(())
}
