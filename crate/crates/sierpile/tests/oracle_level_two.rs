use sierpile::census::{counts_closed, FOREST_CLASSES};
use sierpile::expectations::{self, printed, Sink};
use sierpile::gasket::{build_graph, Corner, VertexAddr};
use sierpile::heights::vertex_probs;
use sierpile::oracle::{enumerate_forests, vertex_table};
use sierpile::rat::{q, Q};

#[test]
fn level_two_matches_engine() {
    let g = build_graph(2).unwrap();
    let c = counts_closed(2).unwrap();
    for class in FOREST_CLASSES {
        let en = enumerate_forests(2, class).unwrap();
        let want = match class {
            sierpile::census::ForestClass::T => c.tau.clone(),
            sierpile::census::ForestClass::R => c.rho.clone(),
            _ => c.sigma.clone(),
        };
        assert_eq!(num_bigint::BigUint::from(en.count), want, "{class:?}");
        let m = vertex_probs(2, class).unwrap();
        for (v, d) in vertex_table(&en).unwrap() {
            assert_eq!(m.get(g.addr(v)), Some(&d), "{class:?} {}", g.addr(v));
        }
    }
}

#[test]
fn level_two_expectations() {
    let g = build_graph(2).unwrap();
    let s2 = enumerate_forests(2, sierpile::census::ForestClass::S2).unwrap();
    let s3 = enumerate_forests(2, sierpile::census::ForestClass::S3).unwrap();
    let half = q(1, 2);
    let interior = (s2.interior_mean_total(&g) + s3.interior_mean_total(&g)) * &half;
    let exact = expectations::expected_desc_total(2).unwrap();
    assert_eq!(interior, (&exact[2] + &exact[3]) * &half);
    let pr = printed::expected_desc_total(2).unwrap();
    assert_ne!(interior, (&pr[2] + &pr[3]) * &half);
    let zeta = (s2.mean_total() + s3.mean_total()) * &half / Q::from_integer(15.into());
    assert_eq!(zeta, expectations::looping_constant(2).unwrap());
    let _ = Sink::Two;
    let v = g.index_of(&VertexAddr::cut_point(2, Corner::Top)).unwrap();
    let zv = (s2.zeta_v(v) + s3.zeta_v(v)) * &half;
    eprintln!("zeta_v bottom cut = {zv}");
}
