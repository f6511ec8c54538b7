use proptest::prelude::*;
use qhje::milne::{FamilyMember, FamilySolution};
use qhje::polar::qmf_from_wavefunction;
use qhje::{AnalyticState, GridSpec, PotentialModel, System, UnitsConfig};

fn psi_for(sys: &System, n: usize, member: FamilyMember) -> Vec<f64> {
    let e = sys.eigenenergy(n).unwrap().energy;
    let spec = GridSpec::new(-8.0, 8.0, 2001).unwrap();
    FamilySolution::new(sys, e, &spec, member).unwrap().wavefunction(&sys.units).unwrap().psi
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn any_amplitude_member_gives_the_same_state(w0 in 0.3f64..3.0, n in 0usize..4) {
        let sys = System::harmonic_default();
        let reference = psi_for(&sys, n, FamilyMember::Anchored);
        let psi = psi_for(&sys, n, FamilyMember::Amplitude(w0));
        let diff = psi.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-9, "w0 = {w0}, n = {n}: {diff:e}");
    }

    #[test]
    fn residues_are_minus_i_hbar(hbar in 0.3f64..2.0, mass in 0.5f64..2.0, omega in 0.5f64..2.0) {
        let units = UnitsConfig::new(hbar, mass).unwrap();
        let sys = System::new(PotentialModel::harmonic(omega).unwrap(), units);
        let st = AnalyticState::new(&sys, 3).unwrap();
        let tp = sys.turning_points(sys.eigenenergy(3).unwrap().energy).unwrap();
        let x = GridSpec::new(2.5 * tp.x_left, 2.5 * tp.x_right, 2001).unwrap().points();
        let psi: Vec<f64> = x.iter().map(|&v| st.value(v)).collect();
        let dpsi: Vec<f64> = x.iter().map(|&v| st.derivative(v)).collect();
        let trace = qmf_from_wavefunction(&psi, &dpsi, &units, &x).unwrap();
        prop_assert_eq!(trace.poles.len(), 3);
        for p in &trace.poles {
            prop_assert!(p.residue.re.abs() <= 1e-6 && (p.residue.im + hbar).abs() <= 1e-6 * hbar);
        }
    }
}
