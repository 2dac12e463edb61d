use proptest::prelude::*;

use fps_tunnel::band::{find_band, EnergyScan};
use fps_tunnel::bloch::{abs_tilde_alpha_sq, tilde_alpha};
use fps_tunnel::transfer::unit_cell_matrix;
use fps_tunnel::UnitCell;

fn reference_cell() -> UnitCell {
    UnitCell::gaas_superlattice()
}

fn cell_strategy() -> impl Strategy<Value = UnitCell> {
    (0.5f64..4.0, 2.0f64..10.0, 0.05f64..0.5, 0.04f64..0.2)
        .prop_map(|(b, w, v, m)| UnitCell::barrier_well(b, w, v, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn determinant_is_one(cell in cell_strategy(), x in 0.001f64..1.5) {
        let e = x * cell.max_potential();
        let m = unit_cell_matrix(e, &cell).unwrap();
        prop_assert!((m.determinant() - 1.0).abs() <= 1e-13 * m.a.norm_sqr().max(1.0));
    }

    #[test]
    fn chebyshev_power_matches_product(e in 0.001f64..0.288, n in 1usize..=50) {
        let m = unit_cell_matrix(e, &reference_cell()).unwrap();
        let c = m.nth_power(n);
        let p = m.power_by_repeated_product(n);
        let scale = p.a_n.norm();
        prop_assert!((c.a_n - p.a_n).norm() <= 1e-10 * scale);
        prop_assert!((c.b_n - p.b_n).norm() <= 1e-10 * scale);
    }

    #[test]
    fn flux_is_conserved(cell in cell_strategy(), x in 0.001f64..1.5, n in 1usize..=20) {
        let m = unit_cell_matrix(x * cell.max_potential(), &cell).unwrap();
        let p = m.nth_power(n);
        let t = p.transmission();
        let r = p.reflection_amplitude().norm_sqr();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&t));
        prop_assert!((t + r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn transmission_forms_agree(e in 0.001f64..0.288, n in 1usize..=30) {
        let p = unit_cell_matrix(e, &reference_cell()).unwrap().nth_power(n);
        prop_assert!((p.transmission() - p.transmission_chebyshev_form()).abs() < 1e-10);
    }

    #[test]
    fn alpha_ratio_below_one_in_band(x in 0.01f64..0.99, n in 2usize..=12) {
        let cell = reference_cell();
        let w = find_band(&cell, 1, EnergyScan::up_to(0.288)).unwrap();
        let e = w.e_low + x * w.width();
        let alpha = tilde_alpha(e, &cell, n, &w).unwrap().norm_sqr();
        let closed = abs_tilde_alpha_sq(&unit_cell_matrix(e, &cell).unwrap());
        prop_assert!(alpha < 1.0);
        prop_assert!((alpha - closed).abs() < 1e-10);
    }
}
