use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::gf::{Field, FieldCtx, FieldElement};
use crate::graph::{Vertex, WeightedGraph};
use crate::measure::{self, MeasurementSpec, WeylIndex};
use crate::noise::{update_for_local_complement, update_for_measurement, ZNoiseVector};

const TOL: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fe(x: u32) -> FieldElement {
    FieldElement::from_index_unchecked(x)
}

fn fields() -> Vec<Field> {
    vec![
        FieldCtx::new(2, 1).unwrap(),
        FieldCtx::new(3, 1).unwrap(),
        FieldCtx::new(5, 1).unwrap(),
        FieldCtx::new(3, 2).unwrap(),
    ]
}

fn rand_elem(rng: &mut ChaCha8Rng, f: &FieldCtx) -> FieldElement {
    fe(rng.random_range(0..f.order()))
}

fn rand_nonzero(rng: &mut ChaCha8Rng, f: &FieldCtx) -> FieldElement {
    fe(rng.random_range(1..f.order()))
}

fn random_graph(rng: &mut ChaCha8Rng, f: &Field, n: usize) -> WeightedGraph {
    let mut g = WeightedGraph::new(f.clone(), 1..=n as Vertex).unwrap();
    for u in 1..=n as Vertex {
        for v in u + 1..=n as Vertex {
            if rng.random_bool(0.6) {
                g.set_weight(u, v, rand_nonzero(rng, f)).unwrap();
            }
        }
    }
    g
}

fn random_word(rng: &mut ChaCha8Rng, f: &FieldCtx, vertices: &[Vertex]) -> ZNoiseVector {
    let vals: Vec<FieldElement> = vertices.iter().map(|_| rand_elem(rng, f)).collect();
    ZNoiseVector::from_dense(vertices, &vals)
}

fn assert_matrix_close(a: &[Complex64], b: &[Complex64], tol: f64) {
    let diff = max_abs_diff(a, b);
    assert!(diff <= tol, "matrices differ by {diff}");
}

#[test]
fn graph_state_examples() {
    let f2 = FieldCtx::new(2, 1).unwrap();
    let single = DenseState::graph_state(&WeightedGraph::new(f2.clone(), [1]).unwrap()).unwrap();
    for a in single.amplitudes() {
        assert!((a - c(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
    }
    let pair = DenseState::graph_state(&WeightedGraph::linear_cluster(f2, 2).unwrap()).unwrap();
    assert_matrix_close(
        pair.amplitudes(),
        &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)],
        1e-15,
    );

    let f3 = FieldCtx::new(3, 1).unwrap();
    let pair = DenseState::graph_state(&WeightedGraph::linear_cluster(f3, 2).unwrap()).unwrap();
    for x in 0..3usize {
        for y in 0..3usize {
            let expected = crate::gf::root_of_unity((x * y % 3) as u32, 3) / 3.0;
            assert!((pair.amplitudes()[x + 3 * y] - expected).norm() < 1e-15);
        }
    }
}

#[test]
fn generator_examples() {
    let f3 = FieldCtx::new(3, 1).unwrap();
    let mut s = DenseState::basis(f3.clone(), vec![1], 1).unwrap();
    s.apply_local(1, &z_op(&f3, fe(1))).unwrap();
    assert!((s.amplitudes()[1] - crate::gf::root_of_unity(1, 3)).norm() < 1e-15);
    let mut s = DenseState::basis(f3.clone(), vec![1], 2).unwrap();
    s.apply_local(1, &x_op(&f3, fe(1))).unwrap();
    assert_eq!(s.amplitudes()[0], c(1.0, 0.0));

    // W(1,1) = i^{-1} Z X, which is the standard Y.
    let f2 = FieldCtx::new(2, 1).unwrap();
    let y = [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)];
    assert_matrix_close(&weyl_op(&f2, fe(1), fe(1)).unwrap().matrix(), &y, 1e-15);
}

#[test]
fn even_extensions_are_rejected() {
    let f4 = FieldCtx::new(2, 2).unwrap();
    let g = WeightedGraph::linear_cluster(f4.clone(), 2).unwrap();
    assert_eq!(
        DenseState::graph_state(&g).unwrap_err(),
        OracleError::EvenExtensionUnsupported { p: 2, m: 2 }
    );
    assert!(s_op(&f4, fe(1)).is_err());
    assert!(weyl_op(&f4, fe(1), fe(1)).is_err());
}

#[test]
fn cap_is_enforced() {
    let f3 = FieldCtx::new(3, 1).unwrap();
    let g = WeightedGraph::linear_cluster(f3, 5).unwrap();
    assert!(matches!(
        DenseState::graph_state_with_cap(&g, 200),
        Err(OracleError::CapExceeded { .. })
    ));
    assert_eq!(
        DenseState::graph_state_with_cap(&g, 243).unwrap().dim(),
        243
    );
}

#[test]
fn projector_examples_and_completeness() {
    let f2 = FieldCtx::new(2, 1).unwrap();
    let p = projector(&f2, WeylIndex::new(fe(1), fe(0)), fe(0))
        .unwrap()
        .matrix();
    assert_matrix_close(
        &p,
        &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        1e-12,
    );
    let f3 = FieldCtx::new(3, 1).unwrap();
    let p = projector(&f3, WeylIndex::new(fe(1), fe(0)), fe(2))
        .unwrap()
        .matrix();
    for (i, x) in p.iter().enumerate() {
        let expected = if i == 8 { 1.0 } else { 0.0 };
        assert!((x - c(expected, 0.0)).norm() < 1e-12);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for f in fields() {
        let d = f.order() as usize;
        for _ in 0..10 {
            let (z, x) = loop {
                let (z, x) = (rand_elem(&mut rng, &f), rand_elem(&mut rng, &f));
                if !(z.is_zero() && x.is_zero()) {
                    break (z, x);
                }
            };
            let basis = WeylIndex::new(z, x);
            let mut sum = vec![c(0.0, 0.0); d * d];
            for b in f.elements() {
                let p = projector(&f, basis, b).unwrap();
                assert_matrix_close(&p.compose(&p).matrix(), &p.matrix(), 1e-12);
                for (s, x) in sum.iter_mut().zip(p.matrix()) {
                    *s += x;
                }
            }
            assert_matrix_close(
                &sum,
                &LocalOp::Diagonal(vec![c(1.0, 0.0); d]).matrix(),
                1e-12,
            );
        }
    }
}

#[test]
fn graph_basis_is_orthonormal() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for f in fields() {
        for _ in 0..10 {
            let n = rng.random_range(1..=3);
            let g = random_graph(&mut rng, &f, n);
            let gs = DenseState::graph_state(&g).unwrap();
            let vs: Vec<Vertex> = g.vertices().collect();
            let z = random_word(&mut rng, &f, &vs);
            let mut t = gs.clone();
            t.apply_z(&z).unwrap();
            let ip = gs.inner(&t).unwrap();
            let expected = if z.is_identity() { 1.0 } else { 0.0 };
            assert!((ip - c(expected, 0.0)).norm() < 1e-12, "{z:?}: {ip}");
            let coeffs = graph_basis_coefficients(&g, &t).unwrap();
            let zi = z_index(f.order(), &vs, &z).unwrap();
            assert!((coeffs[zi].norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn graph_operations_match_their_unitaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for f in fields() {
        for _ in 0..20 {
            let n = rng.random_range(2..=4);
            let g = random_graph(&mut rng, &f, n);
            let v = rng.random_range(1..=n as Vertex);
            let m = rand_elem(&mut rng, &f);
            let mut s = DenseState::graph_state(&g).unwrap();
            s.apply_local_complement(&g, v, m).unwrap();
            let target = DenseState::graph_state(&g.local_complement(v, m).unwrap()).unwrap();
            assert!(
                s.equal_up_to_phase(&target, TOL),
                "tau d={} v={v} m={m:?}",
                f.order()
            );

            let m = rand_nonzero(&mut rng, &f);
            let mut s = DenseState::graph_state(&g).unwrap();
            s.apply_local_multiply(v, m).unwrap();
            let target = DenseState::graph_state(&g.local_multiply(v, m).unwrap()).unwrap();
            assert!(s.equal_up_to_phase(&target, TOL));

            let w = if v == 1 { 2 } else { 1 };
            let k = rand_elem(&mut rng, &f);
            let mut s = DenseState::graph_state(&g).unwrap();
            s.apply_cz(v, w, k).unwrap();
            let target = DenseState::graph_state(&g.apply_cz(v, w, k).unwrap()).unwrap();
            assert!(s.equal_up_to_phase(&target, TOL));
        }
    }
}

fn random_spec(rng: &mut ChaCha8Rng, f: &FieldCtx, g: &WeightedGraph) -> MeasurementSpec {
    let alive: Vec<Vertex> = g.vertices().collect();
    let v = alive[rng.random_range(0..alive.len())];
    let (z, x) = loop {
        let (z, x) = (rand_elem(rng, f), rand_elem(rng, f));
        if !(z.is_zero() && x.is_zero()) {
            break (z, x);
        }
    };
    MeasurementSpec::new(v, WeylIndex::new(z, x), rand_elem(rng, f))
}

#[test]
fn measurement_rules_match_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for f in fields() {
        let d = f.order() as f64;
        for _ in 0..60 {
            let n = rng.random_range(2..=4);
            let g = random_graph(&mut rng, &f, n);
            let spec = random_spec(&mut rng, &f, &g);
            let out = measure::measure(&g, &spec).unwrap();
            let gs = DenseState::graph_state(&g).unwrap();
            let e = eigenvector(&f, spec.basis, spec.outcome).unwrap();
            let bra: Vec<Complex64> = e.iter().map(|x| x.conj()).collect();
            let mut post = gs.contract(spec.vertex, &bra).unwrap();
            let prob = post.norm_sqr();
            if out.rule == measure::RuleTag::Isolated {
                continue;
            }
            assert!((prob - 1.0 / d).abs() < 1e-12, "outcome probability {prob}");
            post.normalize();
            let mut expected = DenseState::graph_state(&out.graph).unwrap();
            expected.apply_correction(&out.correction.gates).unwrap();
            assert!(
                post.equal_up_to_phase(&expected, TOL),
                "d={} rule={:?} spec={spec:?}\n{g:?}\n{:?}",
                f.order(),
                out.rule,
                out.correction
            );
            // The full projected state factorises as |e_b> (x) U|G'>.
            let mut projected = gs.clone();
            projected
                .apply_local(
                    spec.vertex,
                    &projector(&f, spec.basis, spec.outcome).unwrap(),
                )
                .unwrap();
            projected.normalize();
            let product = expected.tensor_front(spec.vertex, &e).sorted();
            assert!(projected.sorted().equal_up_to_phase(&product, TOL));
        }
    }
}

#[test]
fn x_measurement_is_independent_of_neighbor_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for f in fields() {
        let mut checked = 0;
        while checked < 10 {
            let g = random_graph(&mut rng, &f, 4);
            let v = rng.random_range(1..=4);
            let nbrs = g.neighbors(v).unwrap();
            if nbrs.len() < 2 {
                continue;
            }
            checked += 1;
            let basis = WeylIndex::new(fe(0), rand_nonzero(&mut rng, &f));
            let b = rand_elem(&mut rng, &f);
            let bra: Vec<Complex64> = eigenvector(&f, basis, b)
                .unwrap()
                .iter()
                .map(|x| x.conj())
                .collect();
            let mut physical = DenseState::graph_state(&g)
                .unwrap()
                .contract(v, &bra)
                .unwrap();
            physical.normalize();
            for (w0, _) in nbrs {
                let out =
                    measure::measure(&g, &MeasurementSpec::new(v, basis, b).with_neighbor(w0))
                        .unwrap();
                let mut s = DenseState::graph_state(&out.graph).unwrap();
                s.apply_correction(&out.correction.gates).unwrap();
                assert!(s.equal_up_to_phase(&physical, TOL));
            }
        }
    }
}

#[test]
fn update_rules_commute_noise_through() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for f in fields() {
        for _ in 0..30 {
            let n = rng.random_range(2..=4);
            let g = random_graph(&mut rng, &f, n);
            let vs: Vec<Vertex> = g.vertices().collect();
            let z = random_word(&mut rng, &f, &vs);

            let v = rng.random_range(1..=n as Vertex);
            let m = rand_elem(&mut rng, &f);
            let mut s = DenseState::graph_state(&g).unwrap();
            s.apply_z(&z).unwrap();
            s.apply_local_complement(&g, v, m).unwrap();
            let mut t = DenseState::graph_state(&g.local_complement(v, m).unwrap()).unwrap();
            t.apply_z(&update_for_local_complement(&z, &g, v, m).unwrap())
                .unwrap();
            assert!(s.equal_up_to_phase(&t, TOL));

            let spec = random_spec(&mut rng, &f, &g);
            let out = measure::measure(&g, &spec).unwrap();
            if out.rule == measure::RuleTag::Isolated {
                continue;
            }
            let mut s = DenseState::graph_state(&g).unwrap();
            s.apply_z(&z).unwrap();
            let bra: Vec<Complex64> = eigenvector(&f, spec.basis, spec.outcome)
                .unwrap()
                .iter()
                .map(|x| x.conj())
                .collect();
            let mut post = s.contract(spec.vertex, &bra).unwrap();
            post.normalize();
            post.undo_correction(&out.correction.gates).unwrap();
            let mut t = DenseState::graph_state(&out.graph).unwrap();
            t.apply_z(&update_for_measurement(&z, &g, &spec).unwrap())
                .unwrap();
            assert!(post.equal_up_to_phase(&t, TOL), "d={} {spec:?}", f.order());
        }
    }
}

/// `U Z_j(z) U^dagger` and `U X_j(x) U^dagger` on two qudits.
fn conjugated(
    f: &Field,
    u: &dyn Fn(&mut DenseState) -> Result<(), OracleError>,
    u_dag: &dyn Fn(&mut DenseState) -> Result<(), OracleError>,
    inner: &dyn Fn(&mut DenseState) -> Result<(), OracleError>,
) -> Vec<Complex64> {
    operator_matrix(f, &[1, 2], |s| {
        u_dag(s)?;
        inner(s)?;
        u(s)
    })
    .unwrap()
}

#[test]
fn commutation_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for f in fields() {
        let ff = f.clone();
        let z_on = move |j: Vertex, a: FieldElement| {
            let f = ff.clone();
            move |s: &mut DenseState| s.apply_local(j, &z_op(&f, a))
        };
        let ff = f.clone();
        let x_on = move |j: Vertex, a: FieldElement| {
            let f = ff.clone();
            move |s: &mut DenseState| s.apply_local(j, &x_op(&f, a))
        };
        let local = |op: LocalOp| move |s: &mut DenseState| s.apply_local(1, &op);
        for _ in 0..5 {
            let z = rand_elem(&mut rng, &f);
            let x = rand_elem(&mut rng, &f);
            let a = rand_elem(&mut rng, &f);
            let m = rand_nonzero(&mut rng, &f);
            let phase = |k: FieldElement| f.chi(k).to_complex();
            let scaled = |ph: Complex64, m: Vec<Complex64>| {
                m.into_iter().map(|e| e * ph).collect::<Vec<_>>()
            };
            let compose2 =
                |a: &dyn Fn(&mut DenseState) -> Result<(), OracleError>,
                 b: &dyn Fn(&mut DenseState) -> Result<(), OracleError>| {
                    operator_matrix(&f, &[1, 2], |s| {
                        b(s)?;
                        a(s)
                    })
                    .unwrap()
                };
            let single = |g: &dyn Fn(&mut DenseState) -> Result<(), OracleError>| {
                operator_matrix(&f, &[1, 2], g).unwrap()
            };

            // H
            let h = h_op(&f);
            let (hu, hd) = (local(h.clone()), local(h.adjoint()));
            assert_matrix_close(
                &conjugated(&f, &hu, &hd, &z_on(1, z)),
                &single(&x_on(1, f.neg(z))),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &hu, &hd, &x_on(1, x)),
                &single(&z_on(1, x)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &hu, &hd, &z_on(2, z)),
                &single(&z_on(2, z)),
                1e-12,
            );
            // H^dagger
            assert_matrix_close(
                &conjugated(&f, &hd, &hu, &z_on(1, z)),
                &single(&x_on(1, z)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &hd, &hu, &x_on(1, x)),
                &single(&z_on(1, f.neg(x))),
                1e-12,
            );
            // M(m^{-1})
            let mi = f.inv(m).unwrap();
            let (mu, md) = (local(m_op(&f, mi).unwrap()), local(m_op(&f, m).unwrap()));
            assert_matrix_close(
                &conjugated(&f, &mu, &md, &z_on(1, z)),
                &single(&z_on(1, f.mul(m, z))),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &mu, &md, &x_on(1, x)),
                &single(&x_on(1, f.mul(mi, x))),
                1e-12,
            );
            // S(lambda)
            let su = local(s_op(&f, a).unwrap());
            let sd = local(s_op(&f, a).unwrap().adjoint());
            assert_matrix_close(
                &conjugated(&f, &su, &sd, &z_on(1, z)),
                &single(&z_on(1, z)),
                1e-12,
            );
            let lhs = conjugated(&f, &su, &sd, &x_on(1, x));
            let rhs = match f.inv2() {
                Some(h) => scaled(
                    phase(f.mul(h, f.mul(a, f.mul(x, x)))),
                    compose2(&x_on(1, x), &z_on(1, f.mul(a, x))),
                ),
                None => {
                    let ax = a.index() * x.index();
                    scaled(
                        crate::gf::chi4(ax),
                        compose2(&x_on(1, x), &z_on(1, f.mul(a, x))),
                    )
                }
            };
            assert_matrix_close(&lhs, &rhs, 1e-12);
            // Z(a), X(a)
            let (za, zd) = (z_on(1, a), z_on(1, f.neg(a)));
            assert_matrix_close(
                &conjugated(&f, &za, &zd, &x_on(1, x)),
                &scaled(phase(f.mul(a, x)), single(&x_on(1, x))),
                1e-12,
            );
            let (xa, xd) = (x_on(1, a), x_on(1, f.neg(a)));
            assert_matrix_close(
                &conjugated(&f, &xa, &xd, &z_on(1, z)),
                &scaled(phase(f.neg(f.mul(a, z))), single(&z_on(1, z))),
                1e-12,
            );
            // CZ
            let one = f.one();
            let cz = |s: &mut DenseState| s.apply_cz(1, 2, one);
            let czd = |s: &mut DenseState| s.apply_cz(1, 2, f.neg(one));
            assert_matrix_close(
                &conjugated(&f, &cz, &czd, &z_on(2, z)),
                &single(&z_on(2, z)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &cz, &czd, &x_on(1, x)),
                &compose2(&x_on(1, x), &z_on(2, x)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &cz, &czd, &x_on(2, x)),
                &compose2(&x_on(2, x), &z_on(1, x)),
                1e-12,
            );
            // CX with control 1, target 2: |s, t> -> |s, t + s>
            let cx = |s: &mut DenseState| s.apply_cx(1, 2, one);
            let cxd = |s: &mut DenseState| s.apply_cx(1, 2, f.neg(one));
            assert_matrix_close(
                &conjugated(&f, &cx, &cxd, &z_on(1, z)),
                &single(&z_on(1, z)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &cx, &cxd, &z_on(2, z)),
                &compose2(&z_on(1, f.neg(z)), &z_on(2, z)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &cx, &cxd, &x_on(1, x)),
                &compose2(&x_on(1, x), &x_on(2, x)),
                1e-12,
            );
            assert_matrix_close(
                &conjugated(&f, &cx, &cxd, &x_on(2, x)),
                &single(&x_on(2, x)),
                1e-12,
            );
        }
    }
}

#[test]
fn projector_equivalences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for f in fields() {
        if f.p() == 2 {
            continue;
        }
        for _ in 0..5 {
            let g = random_graph(&mut rng, &f, 3);
            let vs: Vec<Vertex> = g.vertices().collect();
            let v = 1;
            let b = rand_elem(&mut rng, &f);
            let m = rand_nonzero(&mut rng, &f);
            let n = rand_nonzero(&mut rng, &f);
            let proj = |z: FieldElement, x: FieldElement, vertex: Vertex| {
                let op = projector(&f, WeylIndex::new(z, x), b).unwrap();
                operator_matrix(&f, &vs, move |s| s.apply_local(vertex, &op)).unwrap()
            };
            let sandwich =
                |pre: &dyn Fn(&mut DenseState) -> Result<(), OracleError>,
                 mid: LocalOp,
                 post: &dyn Fn(&mut DenseState) -> Result<(), OracleError>| {
                    operator_matrix(&f, &vs, |s| {
                        pre(s)?;
                        s.apply_local(v, &mid)?;
                        post(s)
                    })
                    .unwrap()
                };
            let pz = |zz: FieldElement| projector(&f, WeylIndex::new(zz, f.zero()), b).unwrap();
            let lc = |k: FieldElement| {
                let g = g.clone();
                move |s: &mut DenseState| s.apply_local_complement(&g, v, k)
            };

            // P(W(1,m)) = L(-m) P(Z) L(m)
            assert_matrix_close(
                &proj(f.one(), m, v),
                &sandwich(&lc(m), pz(f.one()), &lc(f.neg(m))),
                1e-12,
            );
            // P(Z(n)) = M(n^{-1}) P(Z) M(n)
            let ni = f.inv(n).unwrap();
            let mul = |k: FieldElement| {
                let op = m_op(&f, k).unwrap();
                move |s: &mut DenseState| s.apply_local(v, &op)
            };
            assert_matrix_close(
                &proj(n, f.zero(), v),
                &sandwich(&mul(n), pz(f.one()), &mul(ni)),
                1e-12,
            );
            // P(W(n,m)) = L(-m/n) P(Z(n)) L(m/n)
            let mn = f.div(m, n).unwrap();
            assert_matrix_close(
                &proj(n, m, v),
                &sandwich(&lc(mn), pz(n), &lc(f.neg(mn))),
                1e-12,
            );
            // P(X(m)) = M(m) P(X) M(m^{-1})
            let mi = f.inv(m).unwrap();
            let px = projector(&f, WeylIndex::new(f.zero(), f.one()), b).unwrap();
            assert_matrix_close(
                &proj(f.zero(), m, v),
                &sandwich(&mul(mi), px, &mul(m)),
                1e-12,
            );
            // P(X) = L_{w0}(-r) P(W(1,1)) L_{w0}(r)
            let Some(&(w0, a)) = g.neighbors(v).unwrap().first() else {
                continue;
            };
            let r = f.neg(f.inv(f.mul(a, a)).unwrap());
            let lw = |k: FieldElement| {
                let g = g.clone();
                move |s: &mut DenseState| s.apply_local_complement(&g, w0, k)
            };
            let pw = projector(&f, WeylIndex::new(f.one(), f.one()), b).unwrap();
            assert_matrix_close(
                &proj(f.zero(), f.one(), v),
                &sandwich(&lw(r), pw, &lw(f.neg(r))),
                1e-12,
            );
        }
    }
}

#[test]
fn dephasing_and_fidelity_examples() {
    let f2 = FieldCtx::new(2, 1).unwrap();
    let plus = DenseState::graph_state(&WeightedGraph::new(f2.clone(), [1]).unwrap()).unwrap();
    let mut ens = Ensemble::pure(plus.clone());
    ens.apply_z_channel(
        &crate::noise::dephasing_channel(&WeightedGraph::new(f2.clone(), [1]).unwrap(), 1, 0.0)
            .unwrap(),
    )
    .unwrap();
    let rho = ens.to_density_matrix().unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-12);
    assert_matrix_close(
        rho.entries(),
        &[c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)],
        1e-12,
    );

    let bell = WeightedGraph::linear_cluster(f2.clone(), 2).unwrap();
    let target = DenseState::graph_state(&bell).unwrap();
    assert!((Ensemble::pure(target.clone()).fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
    let mut other = target.clone();
    other.apply_z(&ZNoiseVector::unit(1, fe(1))).unwrap();
    assert!(
        Ensemble::pure(other.clone())
            .fidelity(&target)
            .unwrap()
            .abs()
            < 1e-12
    );
    let mixed = Ensemble::from_members(vec![(0.5, target.clone()), (0.5, other)]);
    assert!((mixed.fidelity(&target).unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn depolarizing_shortcut_matches_weyl_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for f in fields() {
        let g = random_graph(&mut rng, &f, 2);
        let mut a = DensityMatrix::from_pure(&DenseState::graph_state(&g).unwrap()).unwrap();
        a.apply_local(2, &h_op(&f)).unwrap();
        let mut b = a.clone();
        a.depolarize(1, 0.3).unwrap();
        b.depolarize_weyl_sum(1, 0.3).unwrap();
        assert!(a.max_abs_diff(&b).unwrap() < 1e-12);
        assert!((a.trace().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn density_matrix_projection_matches_ensemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for f in fields() {
        let g = random_graph(&mut rng, &f, 3);
        let spec = random_spec(&mut rng, &f, &g);
        let gs = DenseState::graph_state(&g).unwrap();
        let mut rho = DensityMatrix::from_pure(&gs).unwrap();
        let mut ens = Ensemble::pure(gs);
        let p1 = rho
            .project_weyl(spec.vertex, spec.basis, spec.outcome)
            .unwrap();
        let p2 = ens.project(spec.vertex, spec.basis, spec.outcome).unwrap();
        assert!((p1 - p2).abs() < 1e-12);
        let back = ens.to_density_matrix().unwrap();
        assert!(rho.max_abs_diff(&back).unwrap() < 1e-12);
    }
}

#[test]
fn replay_matches_tracking_on_random_scripts() {
    use crate::noise::{pauli_channel, Operation, TrackedState};
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in fields() {
        for _ in 0..15 {
            let n = rng.random_range(2..=4);
            let g = random_graph(&mut rng, &f, n);
            let vs: Vec<Vertex> = g.vertices().collect();
            let mut physical = Vec::new();
            let mut channels = Vec::new();
            for _ in 0..rng.random_range(0..=n) {
                let k = rng.random_range(1..=3);
                let mut terms: Vec<(f64, ZNoiseVector, ZNoiseVector)> = Vec::new();
                for _ in 0..k {
                    terms.push((
                        rng.random_range(0.1..1.0),
                        random_word(&mut rng, &f, &vs),
                        random_word(&mut rng, &f, &vs),
                    ));
                }
                let total: f64 = terms.iter().map(|t| t.0).sum();
                for t in terms.iter_mut() {
                    t.0 /= total;
                }
                channels.push(pauli_channel(&g, terms.iter().cloned()).unwrap());
                physical.push(terms);
            }
            let mut script = Vec::new();
            let mut cur = g.clone();
            for _ in 0..rng.random_range(1..=4) {
                let alive: Vec<Vertex> = cur.vertices().collect();
                let v = alive[rng.random_range(0..alive.len())];
                let op = match rng.random_range(0..4) {
                    0 => Operation::LocalComplement {
                        vertex: v,
                        factor: rand_elem(&mut rng, &f),
                    },
                    1 => Operation::LocalMultiply {
                        vertex: v,
                        factor: rand_nonzero(&mut rng, &f),
                    },
                    2 if alive.len() >= 2 => {
                        let w = *alive.iter().find(|&&u| u != v).unwrap();
                        Operation::Cz {
                            a: v,
                            b: w,
                            count: rand_elem(&mut rng, &f),
                        }
                    }
                    _ if alive.len() >= 2 => Operation::Measure(random_spec(&mut rng, &f, &cur)),
                    _ => Operation::LocalComplement {
                        vertex: v,
                        factor: f.one(),
                    },
                };
                let mut probe = TrackedState::<f64>::new(cur.clone(), Vec::new()).unwrap();
                probe.apply(&op).unwrap();
                cur = probe.graph().clone();
                script.push(op);
            }
            let tracked =
                crate::noise::nsf_apply(TrackedState::new(g.clone(), channels).unwrap(), &script)
                    .unwrap();
            let (final_graph, ens) = replay(&g, &physical, &script).unwrap();
            assert_eq!(&final_graph, tracked.graph());
            let cmp = compare_with_tracked(&ens, tracked.graph(), tracked.channels()).unwrap();
            assert!(cmp.within(TOL), "d={} {cmp:?}\n{script:?}", f.order());
        }
    }
}
