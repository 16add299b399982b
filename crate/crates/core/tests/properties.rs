use num_complex::Complex64 as C;
use proptest::prelude::*;
use wronski_core::critpoly::{enumerate_open_faces, points_from_seq, seq_from_points};
use wronski_core::labelpoly::{
    interior_labeling, lemma6_labeling, predicted_support, support, validate_labeling, ArcSet, Labeling,
};
use wronski_core::netcomb::{enumerate_nets, AnalyzedNet, NetClass};
use wronski_core::numcore::{poly_roots, wronskian, HPoint, Mobius, Poly};

fn net_strategy() -> impl Strategy<Value = AnalyzedNet> {
    (3usize..=6).prop_flat_map(|d| {
        let nets = enumerate_nets(d).unwrap();
        (0..nets.len()).prop_map(move |i| AnalyzedNet::new(&nets[i]).unwrap())
    })
}

fn complex() -> impl Strategy<Value = C> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C::new(a, b))
}

fn poly(max_len: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(complex(), 1..=max_len).prop_map(Poly::new)
}

fn close(a: &Poly, b: &Poly, tol: f64) -> bool {
    let n = a.coeffs().len().max(b.coeffs().len());
    (0..n).all(|k| (a.coeff(k) - b.coeff(k)).norm() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn net_json_round_trips(net in net_strategy()) {
        let back = NetClass::from_json(&net.net.to_json()).unwrap();
        prop_assert_eq!(back, net.net.clone());
    }

    #[test]
    fn every_open_face_has_a_labeling_with_that_support(net in net_strategy(), pick in any::<prop::sample::Index>()) {
        let faces = enumerate_open_faces(&net);
        let w = faces[pick.index(faces.len())].w;
        let p = lemma6_labeling(&net, &w).unwrap();
        prop_assert!(validate_labeling(&net, &p).is_empty());
        prop_assert_eq!(support(&net, &p).e_arcs, w.arcs());
        prop_assert_eq!(predicted_support(&net, &p), w.arcs());
        let back = Labeling::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn interior_labeling_is_positive(net in net_strategy()) {
        let p = interior_labeling(&net).unwrap();
        prop_assert!(validate_labeling(&net, &p).is_empty());
        prop_assert!(net.disk_edges().iter().all(|&e| p.get(e) > 0.0));
        prop_assert_eq!(support(&net, &p).e_arcs, ArcSet::full(net.net.vertex_count()));
    }

    #[test]
    fn critical_sequences_round_trip(net in net_strategy(), pick in any::<prop::sample::Index>()) {
        let faces = enumerate_open_faces(&net);
        let seq = faces[pick.index(faces.len())].barycenter(&net);
        let pts = points_from_seq(&seq);
        prop_assert!(pts.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        let back = seq_from_points(&net, &pts).unwrap();
        for (a, b) in seq.lengths().iter().zip(back.lengths()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn wronskian_is_antisymmetric_and_bilinear(r in poly(5), q in poly(5), s in poly(5), a in complex()) {
        let w = wronskian(&r, &q);
        let anti = wronskian(&q, &r).scale(C::new(-1.0, 0.0));
        prop_assert!(close(&w, &anti, 1e-9));
        let sum: Vec<C> = (0..5).map(|k| q.coeff(k) + s.coeff(k) * a).collect();
        let lhs = wronskian(&r, &Poly::new(sum));
        let rhs_terms = (wronskian(&r, &q), wronskian(&r, &s).scale(a));
        let n = lhs.coeffs().len().max(8);
        for k in 0..n {
            prop_assert!((lhs.coeff(k) - rhs_terms.0.coeff(k) - rhs_terms.1.coeff(k)).norm() < 1e-8);
        }
    }

    #[test]
    fn roots_rebuild_the_polynomial(roots in prop::collection::vec(complex(), 1..7)) {
        let p = Poly::from_roots(&roots);
        let found = poly_roots(&p).unwrap();
        prop_assert_eq!(found.len(), roots.len());
        prop_assert!(close(&Poly::from_roots(&found), &p, 1e-6));
    }

    #[test]
    fn mobius_inverse_and_composition(e in prop::array::uniform4(complex()), f in prop::array::uniform4(complex()), z in complex()) {
        prop_assume!((e[0] * e[3] - e[1] * e[2]).norm() > 0.1);
        prop_assume!((f[0] * f[3] - f[1] * f[2]).norm() > 0.1);
        let m = Mobius::new(e[0], e[1], e[2], e[3]).unwrap();
        let n = Mobius::new(f[0], f[1], f[2], f[3]).unwrap();
        let p = HPoint::finite(z);
        let id = m.inverse().apply_h(m.apply_h(p));
        prop_assert!(id.chordal(&p) < 1e-9);
        let two = m.compose(&n).apply_h(p);
        prop_assert!(two.chordal(&m.apply_h(n.apply_h(p))) < 1e-9);
    }
}
