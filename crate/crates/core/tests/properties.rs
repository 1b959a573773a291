use std::f64::consts::PI;

use proptest::prelude::*;
use rdmv::experiments::noise;
use rdmv::pressure_law::{build_bump_q, PressureLaw, Table};
use rdmv::solver1d::{run, FluidState, Grid1D, SolverConfig};
use rdmv::weak_strong::tensor::{contract, stress, symmetric_part, trace, traceless, transpose};
use rdmv::weak_strong::{gronwall_verdict, relative_energy_density};
use rdmv::young_measure::{
    assemble, continuity_residual, read_measure, scalar_library, write_measure, RenormFunction, SpaceTimeFunction,
};

fn power_law() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..5.0, 1.0f64..3.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bregman_is_nonnegative_and_vanishes_on_diagonal((a, gamma) in power_law(), rho in 0.0f64..20.0, r in 0.05f64..10.0) {
        let law = PressureLaw::power(a, gamma).unwrap();
        prop_assert!(law.bregman_h(rho, r).unwrap() >= 0.0);
        prop_assert_eq!(law.bregman_h(r, r).unwrap(), 0.0);
    }

    #[test]
    fn small_h_bregman_ratio_is_gamma_minus_one((a, gamma) in power_law(), rho in 0.01f64..20.0, r in 0.05f64..10.0) {
        prop_assume!((rho - r).abs() > 1e-3 * r);
        let law = PressureLaw::power(a, gamma).unwrap();
        let big = law.bregman_h(rho, r).unwrap();
        let small = law.bregman_small_h(rho, r);
        prop_assert!((small.abs() - (gamma - 1.0) * big).abs() <= 1e-9 * (1.0 + big));
    }

    #[test]
    fn potential_identity_holds((a, gamma) in power_law(), rho in 0.01f64..10.0, amp in -0.1f64..0.1) {
        let law = PressureLaw::power(a, gamma).unwrap().with_bump(build_bump_q(1.0, 2.0, amp).unwrap());
        let h_defect = rho * law.potential_dh(rho).unwrap() - law.potential_h(rho).unwrap() - law.h(rho);
        let q_defect = rho * law.potential_dq(rho).unwrap() - law.potential_q(rho).unwrap() - law.q(rho);
        prop_assert!(h_defect.abs() <= 1e-9 * (1.0 + law.h(rho)));
        prop_assert!(q_defect.abs() <= 1e-10);
    }

    #[test]
    fn table_interpolant_is_monotone(steps in prop::collection::vec((0.05f64..1.0, 0.01f64..2.0), 2..8), x in 0.0f64..10.0, dx in 0.0f64..1.0) {
        let mut rho = vec![0.0];
        let mut h = vec![0.0];
        for (dr, dh) in steps {
            rho.push(rho.last().unwrap() + dr);
            h.push(h.last().unwrap() + dh);
        }
        let table = Table::new(rho, h, 2.0).unwrap();
        prop_assert!(table.value(x + dx) >= table.value(x));
        prop_assert!(table.derivative(x) >= 0.0);
    }

    #[test]
    fn traceless_part_is_symmetric_and_tracefree(d in 2usize..=3, entries in prop::collection::vec(-5.0f64..5.0, 9)) {
        let a = &entries[..d * d];
        let t = traceless(a, d);
        prop_assert!(trace(&t, d).abs() <= 1e-12);
        prop_assert_eq!(transpose(&t, d), t.clone());
        let tt = contract(&t, &t);
        prop_assert!((tt - 2.0 * contract(&t, a)).abs() <= 1e-12 * (1.0 + tt));
    }

    #[test]
    fn stress_power_is_nonnegative(d in 1usize..=3, entries in prop::collection::vec(-5.0f64..5.0, 9), mu in 0.0f64..3.0, lambda in 0.01f64..3.0) {
        let dm = symmetric_part(&entries[..d * d], d);
        prop_assert!(contract(&stress(&dm, mu, lambda, d), &dm) >= -1e-12);
    }

    #[test]
    fn relative_energy_density_is_nonnegative(s in 0.0f64..10.0, v in -3.0f64..3.0, r in 0.1f64..5.0, u in -3.0f64..3.0, gamma in 1.0f64..3.0) {
        let law = PressureLaw::power(1.0, gamma).unwrap();
        prop_assert!(relative_energy_density(&law, s, v, r, u).unwrap() >= 0.0);
        prop_assert_eq!(relative_energy_density(&law, r, u, r, u).unwrap(), 0.0);
    }

    #[test]
    fn truncation_renormalization_is_flat_beyond_threshold(r0 in 0.1f64..2.0, gap in 0.05f64..2.0, s in 0.0f64..10.0) {
        let b = RenormFunction::truncation(r0, r0 + gap).unwrap();
        if s > r0 + gap {
            prop_assert_eq!(b.derivative(s), 0.0);
        }
        if s <= r0 {
            prop_assert!((b.value(s) - s).abs() <= 1e-14);
        }
    }

    #[test]
    fn noise_is_bounded_and_reproducible(seed in any::<u64>(), member in 0usize..16, x in 0.0f64..1.0) {
        let xi = noise(seed, member, 4, 1.0);
        prop_assert!(xi(x).abs() <= 1.0 + 1e-12);
        prop_assert_eq!(xi(x), noise(seed, member, 4, 1.0)(x));
    }

    #[test]
    fn nonincreasing_energy_passes_gronwall(e0 in 1e-6f64..1.0, decay in prop::collection::vec(0.5f64..1.0, 1..20), rate in 0.0f64..5.0) {
        let mut e = vec![e0];
        for f in decay {
            e.push(e.last().unwrap() * f);
        }
        let times: Vec<f64> = (0..e.len()).map(|i| i as f64 * 0.1).collect();
        let v = gronwall_verdict(&times, &e, &vec![0.0; e.len()], rate, 1.0).unwrap();
        prop_assert!(v.pass);
        prop_assert!((v.lambda_emp - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solver_conserves_mass_and_dissipates_energy(
        base in 0.5f64..2.0,
        amp in 0.0f64..0.4,
        mode in 1usize..4,
        vel in -0.5f64..0.5,
        delta in prop::sample::select(vec![0.0, 1e-3]),
    ) {
        let grid = Grid1D::new(48, 1.0).unwrap();
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 1.4).unwrap(), 0.05, 0.05);
        cfg.delta = delta;
        cfg.track_budget = true;
        let init = FluidState::from_profile(&grid, |x| {
            (base * (1.0 + amp * (2.0 * PI * mode as f64 * x).cos()), vel * (PI * x).sin())
        });
        let traj = run(&cfg, &init).unwrap();
        let m0 = init.mass(&grid);
        prop_assert!((traj.last().mass(&grid) - m0).abs() <= 1e-12 * m0);
        let e0 = traj.energy[0];
        for b in &traj.budgets {
            prop_assert!(b.slack() >= -1e-8 * e0.abs().max(1e-12));
        }
        prop_assert!(traj.snapshots.iter().all(|s| s.rho.iter().all(|r| *r >= 0.0)));
    }

    #[test]
    fn measure_round_trips_and_constant_state_has_zero_residual(rho in 0.2f64..3.0, n in 8usize..24) {
        let grid = Grid1D::new(n, 1.0).unwrap();
        let mut cfg = SolverConfig::new(grid, PressureLaw::power(1.0, 2.0).unwrap(), 0.1, 0.02);
        cfg.output_dt = Some(0.01);
        let traj = run(&cfg, &FluidState::uniform(&grid, rho, 0.0)).unwrap();
        let v = assemble(&[&traj, &traj], cfg.floor).unwrap();
        let mut text = Vec::new();
        write_measure(&v, &mut text).unwrap();
        prop_assert_eq!(read_measure(text.as_slice()).unwrap(), v.clone());
        for psi in scalar_library(1.0) {
            let r = continuity_residual(&v, &psi, 0.02).unwrap();
            prop_assert!(r.value.abs() <= 1e-12, "{}: {}", psi.id(), r.value);
        }
    }
}
