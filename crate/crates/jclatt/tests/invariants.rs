use std::f64::consts::PI;

use jclatt::bands::{bloch_fields, winding_analytic, winding_integral};
use jclatt::circuit::{coupler_coefficient, synthesize_flux_for_hopping, SquidCircuit};
use jclatt::effective::{
    build_nodal_chain, chiral_operator, gauge_transform_state, m_prime, GaugeDirection, NodalLoopParams,
};
use jclatt::model::{build_lab_hamiltonian, nodal_drive, DriveTone, HilbertBasis, LatticeSpec, NodalPhaseConvention, UnitCellParams};
use jclatt::units::mhz;
use jclatt::C64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lab_hamiltonian_is_hermitian(
        n in 2usize..4,
        g_a in 50.0f64..600.0,
        g_b in 50.0f64..600.0,
        m in -3.0f64..3.0,
        t in 0.0f64..1.0,
        cr in any::<bool>(),
    ) {
        let lat = LatticeSpec::new(
            n,
            UnitCellParams::from_mhz(6000.0, g_a).unwrap(),
            UnitCellParams::from_mhz(6000.0, g_b).unwrap(),
        ).unwrap();
        let sched = nodal_drive(&lat, mhz(3.0), mhz(m), NodalPhaseConvention::Corrected).unwrap();
        let basis = HilbertBasis::new(n, 2, 3).unwrap();
        let h = build_lab_hamiltonian(&lat, &sched, &basis, t, cr).unwrap();
        prop_assert!(h.hermiticity_rel() < 1e-12);
    }

    #[test]
    fn chain_has_chiral_symmetry(n in 2usize..12, m in -4.0f64..4.0) {
        let h = build_nodal_chain(&NodalLoopParams::new(n, 1.0, m).unwrap());
        let s = chiral_operator(n);
        let anti = &s * &h + &h * &s;
        prop_assert!(anti.norm() < 1e-12 * h.norm().max(1.0));
    }

    #[test]
    fn gauge_round_trip(re in prop::collection::vec(-1.0f64..1.0, 8), im in prop::collection::vec(-1.0f64..1.0, 8)) {
        let psi: Vec<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let fwd = gauge_transform_state(&psi, GaugeDirection::Forward).unwrap();
        let back = gauge_transform_state(&fwd, GaugeDirection::Inverse).unwrap();
        for (a, b) in psi.iter().zip(&back) {
            prop_assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn winding_integral_matches_closed_form(
        big_m in -6.0f64..6.0,
        d in 0.0f64..3.0,
        ky in -1.0f64..1.0,
        kz in -1.0f64..1.0,
    ) {
        let m = m_prime(big_m, d, ky * PI, kz * PI);
        prop_assume!((m.abs() - 2.0).abs() > 0.05);
        let w = winding_integral(ky * PI, kz * PI, 1.0, big_m, d, 512, 1e-6).unwrap();
        prop_assert_eq!(w.nu, winding_analytic(m, 1.0).unwrap() as i64);
        prop_assert!((w.raw - w.nu as f64).abs() < 1e-3);
    }

    #[test]
    fn bands_are_particle_hole_symmetric(
        kx in -1.0f64..1.0, ky in -1.0f64..1.0, kz in -1.0f64..1.0, big_m in -6.0f64..6.0, d in 0.0f64..3.0,
    ) {
        let p = bloch_fields(kx * PI, ky * PI, kz * PI, 1.0, big_m, d);
        prop_assert!(p.e_plus >= 0.0);
        prop_assert!((p.e_plus + p.e_minus()).abs() == 0.0);
        prop_assert!((p.e_plus - p.b_y.hypot(p.b_z)).abs() < 1e-12);
    }

    #[test]
    fn synthesized_coupler_tracks_target(
        t0 in 0.5f64..3.0,
        phase in -3.0f64..3.0,
        t in 0.0f64..0.05,
    ) {
        let circuit = SquidCircuit::default();
        let tone = DriveTone::new(mhz(t0), mhz(100.0), phase, 1.0).unwrap();
        let syn = synthesize_flux_for_hopping(&[tone], &circuit).unwrap();
        let c = coupler_coefficient(&syn.circuit, &syn.drive, t).unwrap();
        let target = 4.0 * mhz(t0) * (mhz(100.0) * t + phase).cos();
        prop_assert!((c.cross - target).abs() < 1e-9 * mhz(t0));
    }
}
