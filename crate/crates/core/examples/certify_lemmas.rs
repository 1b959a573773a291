//! Lower-bound and h-Bregman certificates for a bumped law, written as CSV.

use rdmv::pressure_law::{
    build_bump_q, certify_h_bound, certify_lower_bound, default_grid, write_certificate_csv, CertificateRow, PressureLaw,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = PressureLaw::power(1.0, 1.4)?.with_bump(build_bump_q(1.0, 2.0, -0.1)?);
    let grid = default_grid(8.0, 1e-3);
    let lower = certify_lower_bound(&law, (0.5, 2.0), &grid)?;
    let upper = certify_h_bound(&law, (0.5, 2.0), &grid)?;
    println!(
        "band [{}, {}]: min c = {:.4e} (middle {:.4e}, outer {:.4e}), max C = {:.4}",
        lower.r1,
        lower.r2,
        lower.min_c(),
        lower.min_c_middle(),
        lower.min_c_outer(),
        upper.max_ratio()
    );
    write_certificate_csv(&CertificateRow::combine(&lower, &upper), std::io::stdout())?;
    Ok(())
}
