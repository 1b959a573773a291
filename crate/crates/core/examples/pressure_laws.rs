//! Pressure laws: power law with a non-monotone bump, a tabulated law, their
//! potentials and Bregman divergences.

use rdmv::pressure_law::{build_bump_q, LawConfig, PressureLaw, Table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = PressureLaw::power(1.0, 2.0)?.with_bump(build_bump_q(1.0, 2.0, 0.4)?);
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>12}", "rho", "p", "p'", "H", "Q", "B_H(rho,1.5)");
    for i in 0..=12 {
        let rho = 0.25 * i as f64;
        println!(
            "{rho:6.2} {:10.5} {:10.5} {:10.5} {:10.5} {:12.5}",
            law.pressure(rho)?,
            law.dpressure(rho),
            law.potential_h(rho)?,
            law.potential_q(rho)?,
            law.bregman_h(rho, 1.5)?
        );
    }

    let table = Table::new(vec![0.0, 0.5, 1.0, 2.0], vec![0.0, 0.2, 1.0, 4.5], 2.0)?;
    let tabulated = PressureLaw::tabulated(table);
    println!("tabulated: h(1.5) = {:.5}, H(1.5) = {:.5}, h(3) = {:.5}", tabulated.h(1.5), tabulated.potential_h(1.5)?, tabulated.h(3.0));

    let cfg: LawConfig = toml::from_str("kind = \"power\"\ngamma = 1.4\nbump = [1.0, 2.0, 0.05]\n")?;
    let from_toml = cfg.build()?;
    println!("from TOML: gamma = {}, q(1.5) = {:.5}", from_toml.gamma(), from_toml.q(1.5));
    Ok(())
}
