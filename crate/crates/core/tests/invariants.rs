//! Property tests for the structural and numerical invariants of each module.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use lgt_core::circuits::{
    build_trotter_step, build_wala, AncillaMode, EvolutionMode, QubitLayout, TrotterSpec, WalaMode,
};
use lgt_core::gate::Gate;
use lgt_core::lattice::{
    build_lattice, entangling_count_per_cycle, mixed_state_mean_separation, Lattice, LatticeSpec, PathSpec, Side,
};
use lgt_core::mitigation::{
    corrupt_distribution, effective_depol, invert_readout, postselect, rescale, PostselectCriteria,
};
use lgt_core::model::{hamiltonian_terms, HamiltonianParams};
use lgt_core::noise::{run_trajectories, NoiseModel, ReadoutModel};
use lgt_core::observables::{
    charge_count, mean_separation_exact, two_time_zz, vertex_expectations, vertex_masks, vertex_parities, row_bits,
    CorrelatorMethod, Propagator,
};
use lgt_core::pauli::{Pauli, PauliString};
use lgt_core::prep::{prep_circuit, prepare_state, Prep};
use lgt_core::reference::{build_hamiltonian, exact_evolve};
use lgt_core::shots::ShotTable;
use lgt_core::state::StateVector;
use lgt_core::wala::{energy_theta, optimize_theta, theta_thermo, THETA_MIN};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn lattice(lx: usize, ly: usize) -> Lattice {
    build_lattice(&LatticeSpec::new(lx, ly)).unwrap()
}

fn pauli_of(i: u8) -> Pauli {
    [Pauli::X, Pauli::Y, Pauli::Z][i as usize % 3]
}

fn random_gate(kind: usize, angle: f64) -> Gate {
    match kind {
        0 => Gate::H,
        1 => Gate::X,
        2 => Gate::Y,
        3 => Gate::S,
        4 => Gate::Rx { theta: angle },
        5 => Gate::Ry { theta: angle },
        6 => Gate::Rz { theta: angle },
        7 => Gate::Phase { phi: angle },
        8 => Gate::PhasedXz { x: angle, z: -0.5 * angle, a: 0.3 },
        9 => Gate::Rn { axis: [0.6, 0.0, 0.8], angle },
        10 => Gate::Cnot,
        _ => Gate::Cz,
    }
}

fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    loop {
        let ops: Vec<(usize, Pauli)> = (0..n)
            .filter_map(|q| rng.gen_bool(0.5).then(|| (q, pauli_of(rng.gen_range(0..3)))))
            .collect();
        if !ops.is_empty() {
            return PauliString::new(ops).unwrap();
        }
    }
}

fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

// ---- lattice ----

#[test]
fn every_grid_link_sits_in_two_vertex_supports() {
    for lx in 2..=5 {
        for ly in 2..=5 {
            for spec in [
                LatticeSpec::new(lx, ly),
                LatticeSpec::new(lx, ly)
                    .with_pinned(Side::Left, ly / 2, 0)
                    .with_pinned(Side::Right, ly / 2, lx - 1),
            ] {
                let l = build_lattice(&spec).unwrap();
                let mut uses = vec![0; l.n_links()];
                for s in l.vertex_supports() {
                    for &q in s {
                        uses[q] += 1;
                    }
                }
                let pinned = l.pinned_link_ids();
                for (q, &n) in uses.iter().enumerate() {
                    assert_eq!(n, if pinned.contains(&q) { 1 } else { 2 }, "{lx}x{ly} link {q}");
                }
                let total: usize = uses.iter().sum();
                assert_eq!(total, 2 * l.n_grid_links() + pinned.len());
            }
        }
    }
}

#[test]
fn gate_count_formula_holds_up_to_5x5() {
    let params = HamiltonianParams::new(0.5, 0.25);
    for lx in 2..=5 {
        for ly in 2..=5 {
            let l = lattice(lx, ly);
            // Compiled only, never simulated: lift the statevector cap.
            let layout = QubitLayout::new(&l, AncillaMode::Recycled, 64).unwrap();
            let spec = TrotterSpec::new(&l, params.clone(), 0.3, 1).with_mode(EvolutionMode::GateLevel);
            let step = build_trotter_step(&l, &spec, &layout).unwrap();
            assert_eq!(step.entangling_count(), entangling_count_per_cycle(lx, ly), "{lx}x{ly}");
        }
    }
}

#[test]
fn mixed_separation_matches_sampled_bitstrings() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (lx, ly) in [(3, 2), (4, 3)] {
        let l = lattice(lx, ly);
        let masks = vertex_masks(&l);
        let mut d = Vec::new();
        while d.len() < 20_000 {
            let row: u64 = rng.gen::<u64>() & ((1 << l.n_links()) - 1);
            if charge_count(row, &masks) != 2 {
                continue;
            }
            let rec = vertex_parities(&row_bits(row, l.n_links()), &l).unwrap();
            let (a, b) = (rec.violated[0], rec.violated[1]);
            d.push(l.manhattan_distance(a, b) as f64);
        }
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let r = mixed_state_mean_separation(lx, ly);
        let want = *r.numer() as f64 / *r.denom() as f64;
        assert!((mean - want).abs() < 3.0 * sd / n.sqrt(), "{lx}x{ly}: {mean} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_walks_are_valid_paths(seed in any::<u64>(), len in 1usize..8) {
        let l = lattice(4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = rng.gen_range(0..l.n_vertices());
        let mut links = Vec::new();
        let mut seen = BTreeSet::from([v]);
        for _ in 0..len {
            let options: Vec<usize> = l
                .vertex_support(v)
                .iter()
                .copied()
                .filter(|&q| l.link_vertices(q).iter().all(|w| *w == v || !seen.contains(w)))
                .collect();
            if options.is_empty() {
                break;
            }
            let q = options[rng.gen_range(0..options.len())];
            links.push(q);
            v = *l.link_vertices(q).iter().find(|&&w| w != v).unwrap();
            seen.insert(v);
        }
        let path = PathSpec::new(&l, links.clone()).unwrap();
        for w in path.links().windows(2) {
            let a: BTreeSet<_> = l.link_vertices(w[0]).iter().collect();
            prop_assert!(l.link_vertices(w[1]).iter().any(|x| a.contains(x)));
        }
        // Odd-degree vertices of the path are exactly the charges the string creates.
        let mut psi = StateVector::zero(l.n_links()).unwrap();
        psi.apply_x_mask(path.mask()).unwrap();
        let odd = vertex_expectations(&psi, &l).unwrap().iter().filter(|a| **a < 0.0).count();
        prop_assert_eq!(odd, 2);
    }

    // ---- state engine ----

    #[test]
    fn unitaries_preserve_norm(
        seed in any::<u64>(),
        ops in prop::collection::vec((0usize..12, -PI..PI, 0usize..8, 1usize..8), 1000),
    ) {
        let mut psi = StateVector::random(8, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for (kind, angle, q, shift) in ops {
            let g = random_gate(kind, angle);
            if g.arity() == 2 {
                psi.apply_gate(&g, &[q, (q + shift) % 8]).unwrap();
            } else {
                psi.apply_gate(&g, &[q]).unwrap();
            }
        }
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pauli_exponentials_invert_and_commute(seed in any::<u64>(), theta in -PI..PI, phi in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StateVector::random(7, &mut rng).unwrap();
        let p = random_pauli(&mut rng, 7);
        let q = random_pauli(&mut rng, 7);
        let mut s = psi.clone();
        s.apply_pauli_exp(&p, theta).unwrap();
        s.apply_pauli_exp(&p, -theta).unwrap();
        prop_assert!(max_diff(&s, &psi) < 1e-10);
        if p.commutes_with(&q) {
            let (mut a, mut b) = (psi.clone(), psi.clone());
            a.apply_pauli_exp(&p, theta).unwrap();
            a.apply_pauli_exp(&q, phi).unwrap();
            b.apply_pauli_exp(&q, phi).unwrap();
            b.apply_pauli_exp(&p, theta).unwrap();
            prop_assert!(max_diff(&a, &b) < 1e-10);
        }
    }

    #[test]
    fn inverse_circuits_undo_random_sequences(
        seed in any::<u64>(),
        ops in prop::collection::vec((0usize..12, -PI..PI, 0usize..5, 1usize..5), 60),
    ) {
        let mut c = lgt_core::circuits::Circuit::new(5);
        for (kind, angle, q, shift) in ops {
            let g = random_gate(kind, angle);
            if g.arity() == 2 {
                c.push(g, &[q, (q + shift) % 5]).unwrap();
            } else {
                c.push(g, &[q]).unwrap();
            }
        }
        let psi = StateVector::random(5, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut s = psi.clone();
        c.run(&mut s).unwrap();
        c.inverse().run(&mut s).unwrap();
        prop_assert!(max_diff(&s, &psi) < 1e-10);
    }

    // ---- circuits ----

    #[test]
    fn gate_level_matches_direct(
        shape in 0usize..4,
        theta in 0.05f64..FRAC_PI_2,
        dt in 0.05f64..0.6,
        h_e in 0.0f64..2.5,
        lam in 0.0f64..0.6,
        recycled in any::<bool>(),
    ) {
        let (lx, ly) = [(2, 2), (3, 2), (2, 3), (4, 3)][shape];
        let l = lattice(lx, ly);
        let params = HamiltonianParams::new(h_e, lam);
        let mode = if recycled || shape == 3 { AncillaMode::Recycled } else { AncillaMode::Parallel };
        let layout = QubitLayout::new(&l, mode, 26).unwrap();
        let prep = Prep::WalaPair { link: None };
        let mut g = StateVector::zero(layout.n_qubits()).unwrap();
        prep_circuit(&l, &prep, theta, WalaMode::Ancilla, &layout).unwrap().run(&mut g).unwrap();
        let spec = TrotterSpec::new(&l, params.clone(), dt, 1);
        let gate = build_trotter_step(&l, &spec.clone().with_mode(EvolutionMode::GateLevel), &layout).unwrap();
        let direct = build_trotter_step(&l, &spec, &QubitLayout::links_only(&l)).unwrap();
        let mut d = prepare_state(&l, &prep, theta).unwrap();
        for _ in 0..2 {
            gate.run(&mut g).unwrap();
            direct.run(&mut d).unwrap();
        }
        let stray: f64 = g.amplitudes().iter().enumerate()
            .filter(|(i, _)| i >> l.n_links() != 0).map(|(_, a)| a.norm_sqr()).sum();
        prop_assert!(stray < 1e-12);
        g.truncate_zero(l.n_links()).unwrap();
        prop_assert!(g.fidelity(&d).unwrap() > 1.0 - 1e-10);
    }

    // ---- wala ----

    #[test]
    fn wala_circuit_matches_analytic_expectations(shape in 0usize..4, theta in 0.0f64..FRAC_PI_2) {
        let (lx, ly) = [(2, 2), (3, 2), (3, 3), (4, 3)][shape];
        let l = lattice(lx, ly);
        let mut psi = StateVector::zero(l.n_links()).unwrap();
        build_wala(&l, theta, WalaMode::AncillaFree, &QubitLayout::links_only(&l)).unwrap().run(&mut psi).unwrap();
        for p in 0..l.n_plaquettes() {
            let b = psi.expectation(&PauliString::x_on(l.plaquette_support(p)).unwrap()).unwrap();
            prop_assert!((b - theta.sin()).abs() < 1e-10);
        }
        for q in 0..l.n_links() {
            let z = psi.expectation(&PauliString::single(q, Pauli::Z)).unwrap();
            let want = if l.is_boundary_link(q) { theta.cos() } else { theta.cos().powi(2) };
            prop_assert!((z - want).abs() < 1e-10);
        }
        let e = build_hamiltonian(&l, &HamiltonianParams::new(0.7, 0.3), &BTreeSet::new()).unwrap().energy(&psi).unwrap();
        prop_assert!((e - energy_theta(theta, lx, ly, &HamiltonianParams::new(0.7, 0.0))).abs() < 1e-10);
    }

    #[test]
    fn optimum_beats_both_fixed_ansatzes(h_e in 0.0f64..3.0, lam in 0.0f64..1.0) {
        let p = HamiltonianParams::new(h_e, lam);
        let sol = optimize_theta(4, 3, &p).unwrap();
        prop_assert!((0.0..=FRAC_PI_2).contains(&sol.theta));
        prop_assert!(sol.energy <= energy_theta(FRAC_PI_2, 4, 3, &p) + 1e-12);
        prop_assert!(sol.energy <= energy_theta(THETA_MIN, 4, 3, &p) + 1e-12);
        prop_assert_eq!(sol.theta, optimize_theta(4, 3, &HamiltonianParams::new(h_e, 0.0)).unwrap().theta);
    }

    // ---- reference ----

    #[test]
    fn sparse_energy_is_term_sum(seed in any::<u64>(), h_e in 0.0f64..2.0, lam in 0.0f64..1.0) {
        let l = lattice(3, 2);
        let params = HamiltonianParams::new(h_e, lam);
        let terms = hamiltonian_terms(&l, &params, &BTreeSet::new()).unwrap();
        let h = build_hamiltonian(&l, &params, &BTreeSet::new()).unwrap();
        let psi = StateVector::random(l.n_links(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let sum: f64 = terms.iter().map(|t| t.coeff * psi.expectation(&t.pauli).unwrap()).sum();
        prop_assert!((h.energy(&psi).unwrap() - sum).abs() < 1e-10);
        let fields = usize::from(h_e != 0.0) + usize::from(lam != 0.0);
        prop_assert_eq!(terms.len(), l.n_vertices() + l.n_plaquettes() + fields * l.n_links());
    }

    #[test]
    fn exact_evolution_conserves_energy_and_charges(seed in any::<u64>(), t in 0.0f64..5.0, h_e in 0.0f64..2.0) {
        let l = lattice(3, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = StateVector::random(l.n_links(), &mut rng).unwrap();
        let h = build_hamiltonian(&l, &HamiltonianParams::new(h_e, 0.4), &BTreeSet::new()).unwrap();
        let out = exact_evolve(&psi, &h, t).unwrap();
        prop_assert!((h.energy(&out).unwrap() - h.energy(&psi).unwrap()).abs() < 1e-8);
        let h0 = build_hamiltonian(&l, &HamiltonianParams::new(h_e, 0.0), &BTreeSet::new()).unwrap();
        let out0 = exact_evolve(&psi, &h0, t).unwrap();
        for (a, b) in vertex_expectations(&out0, &l).unwrap().iter().zip(vertex_expectations(&psi, &l).unwrap()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    // ---- noise ----

    #[test]
    fn trajectories_are_deterministic_and_bounded(seed in any::<u64>()) {
        let l = lattice(3, 2);
        let layout = QubitLayout::auto(&l).unwrap();
        let params = HamiltonianParams::new(0.3, 0.0);
        let mut c = prep_circuit(&l, &Prep::Wala, 1.0, WalaMode::Ancilla, &layout).unwrap();
        let spec = TrotterSpec::new(&l, params, 0.3, 1).with_mode(EvolutionMode::GateLevel);
        let step = build_trotter_step(&l, &spec, &layout).unwrap();
        for _ in 0..4 {
            c.append(&step).unwrap();
        }
        let model = NoiseModel { p2: 0.005, readout: ReadoutModel::ideal(), master_seed: seed };
        let psi0 = StateVector::zero(layout.n_qubits()).unwrap();
        let a = run_trajectories(&c, &psi0, &model, 8, 50).unwrap();
        let b = run_trajectories(&c, &psi0, &model, 8, 50).unwrap();
        prop_assert_eq!(&a, &b);
        let clean = run_trajectories(&c, &psi0, &NoiseModel { p2: 0.0, ..model.clone() }, 2, 20).unwrap();
        for mask in vertex_masks(&l) {
            let (m, _) = a.parity_mean(mask).unwrap();
            prop_assert!(m.abs() <= 1.0);
            // Shots within a trajectory share its error history, so only the
            // noiseless limit is pinned exactly.
            prop_assert_eq!(clean.parity_mean(mask).unwrap().0, 1.0);
        }
    }

    // ---- mitigation ----

    #[test]
    fn global_channel_round_trip(x in -3.0f64..3.0, x0 in -3.0f64..3.0, xd in -3.0f64..3.0, p in 0.0f64..0.99) {
        prop_assume!((x0 - xd).abs() > 1e-3);
        let mix = |v: f64| (1.0 - p) * v + p * xd;
        let pe = effective_depol(mix(x0), x0, xd).unwrap();
        prop_assert!((pe.value - p).abs() < 1e-9);
        prop_assert!((rescale(mix(x), p, xd).unwrap() - x).abs() < 1e-12 * (1.0 + x.abs()) / (1.0 - p));
    }

    #[test]
    fn readout_inversion_is_exact(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = ReadoutModel::uniform(rng.gen_range(0.0..0.2), rng.gen_range(0.0..0.2));
        model.per_qubit.insert(n - 1, lgt_core::noise::ReadoutError { eps0: rng.gen_range(0.0..0.3), eps1: rng.gen_range(0.0..0.3) });
        let mut p: Vec<f64> = (0..1 << n).map(|_| rng.gen::<f64>()).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let qubits: Vec<usize> = (0..n).collect();
        let back = invert_readout(&corrupt_distribution(&p, &qubits, &model).unwrap(), &qubits, &model).unwrap();
        for (a, b) in p.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn postselection_only_filters(rows in prop::collection::vec(0u64..1 << 9, 1..200), anc in any::<bool>(), sector in prop::option::of(0usize..4)) {
        let l = lattice(2, 2);
        let table = ShotTable::from_rows(9, vec![8], rows.clone());
        let out = postselect(&table, Some(&l), PostselectCriteria { ancilla_zero: anc, charge_count: sector }).unwrap();
        let mut it = rows.iter();
        for r in out.table.rows() {
            prop_assert!(it.any(|x| x == r), "kept rows must be an ordered subset");
        }
        prop_assert_eq!(out.total, rows.len());
        prop_assert_eq!(out.kept, out.table.len());
    }

    // ---- observables ----

    #[test]
    fn single_pauli_correlators_are_bounded(seed in any::<u64>(), link in 0usize..7, h_e in 0.0f64..2.0) {
        let l = lattice(3, 2);
        let psi = StateVector::random(l.n_links(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let spec = TrotterSpec::new(&l, HamiltonianParams::new(h_e, 0.25), 0.3, 1);
        let step = build_trotter_step(&l, &spec, &QubitLayout::links_only(&l)).unwrap();
        for c in two_time_zz(&psi, link, Propagator::Trotter(&step), 5, CorrelatorMethod::ExactOracle).unwrap() {
            prop_assert!(c.re.abs() <= 1.0 + 1e-12 && c.im.abs() <= 1.0 + 1e-12);
            prop_assert!(c.norm_sqr() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn separation_is_constant_without_string_tension_dynamics(h_e in 0.0f64..2.5, theta in 0.1f64..FRAC_PI_2) {
        let l = lattice(3, 2);
        let spec = TrotterSpec::new(&l, HamiltonianParams::new(h_e, 0.0), 0.3, 1);
        let step = build_trotter_step(&l, &spec, &QubitLayout::links_only(&l)).unwrap();
        let mut psi = prepare_state(&l, &Prep::WalaPair { link: None }, theta).unwrap();
        let s0 = mean_separation_exact(&psi, &l).unwrap();
        for _ in 0..6 {
            step.run(&mut psi).unwrap();
            let s = mean_separation_exact(&psi, &l).unwrap();
            prop_assert!((s.0 - s0.0).abs() < 1e-10 && (s.1 - s0.1).abs() < 1e-10);
        }
    }
}

#[test]
fn thermodynamic_angle_is_continuous_at_branch_point() {
    for eps in [1e-4, 1e-6, 1e-8] {
        assert!((theta_thermo(0.25 + eps, 1.0) - FRAC_PI_2).abs() < 10.0 * eps.sqrt());
        assert_eq!(theta_thermo(0.25 - eps, 1.0), FRAC_PI_2);
    }
}

#[test]
fn global_trotter_error_is_first_order() {
    let l = lattice(3, 2);
    let params = HamiltonianParams::new(1.0, 0.5);
    let h = build_hamiltonian(&l, &params, &BTreeSet::new()).unwrap();
    let psi0 = prepare_state(&l, &Prep::WalaPair { link: None }, 0.8).unwrap();
    let exact = exact_evolve(&psi0, &h, 1.0).unwrap();
    let mut pts = Vec::new();
    for n in [10usize, 20, 40] {
        let dt = 1.0 / n as f64;
        let step = build_trotter_step(&l, &TrotterSpec::new(&l, params.clone(), dt, 1), &QubitLayout::links_only(&l)).unwrap();
        let mut psi = psi0.clone();
        for _ in 0..n {
            step.run(&mut psi).unwrap();
        }
        let err = psi.amplitudes().iter().zip(exact.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        pts.push((dt.ln(), err.ln()));
    }
    let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
    assert!((slope - 1.0).abs() <= 0.2, "slope {slope}");
}

#[test]
fn stationary_p_eff_grows_with_depth() {
    let l = lattice(3, 2);
    let layout = QubitLayout::auto(&l).unwrap();
    let params = HamiltonianParams::new(0.25, 0.0);
    let prep = prep_circuit(&l, &Prep::WalaPair { link: None }, 0.9, WalaMode::Ancilla, &layout).unwrap();
    let spec = TrotterSpec::new(&l, params, 0.3, 1).with_mode(EvolutionMode::GateLevel);
    let step = build_trotter_step(&l, &spec, &layout).unwrap();
    let model = NoiseModel { p2: 0.01, readout: ReadoutModel::ideal(), master_seed: 5 };
    let tables = lgt_core::noise::run_trajectory_series(
        &prep,
        &step,
        6,
        None,
        &StateVector::zero(layout.n_qubits()).unwrap(),
        &model,
        1500,
        10,
    )
    .unwrap();
    let criteria = PostselectCriteria { ancilla_zero: true, charge_count: Some(2) };
    let mut p = Vec::new();
    for t in &tables {
        let kept = postselect(t, Some(&l), criteria).unwrap().table;
        // Trajectory-clustered error on the pooled mean.
        let mut sums = vec![(0.0, 0.0); t.seeds().len()];
        for (&r, &id) in kept.rows().iter().zip(kept.trajectory_ids()) {
            let rec = vertex_parities(&row_bits(r, l.n_links()), &l).unwrap();
            sums[id as usize].0 += l.manhattan_distance(rec.violated[0], rec.violated[1]) as f64;
            sums[id as usize].1 += 1.0;
        }
        let total: f64 = sums.iter().map(|s| s.1).sum();
        let mean = sums.iter().map(|s| s.0).sum::<f64>() / total;
        let k = sums.len() as f64;
        let se = (k / (k - 1.0) * sums.iter().map(|(s, n)| (s - mean * n).powi(2)).sum::<f64>()).sqrt() / total;
        let pe = effective_depol(mean, 1.0, 5.0 / 3.0).unwrap();
        p.push((pe.raw, se / (2.0 / 3.0)));
    }
    for w in p.windows(2) {
        assert!(w[1].0 - w[0].0 >= -3.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt(), "{p:?}");
    }
    assert!(p[6].0 - p[0].0 > 3.0 * (p[0].1.powi(2) + p[6].1.powi(2)).sqrt(), "{p:?}");
}
