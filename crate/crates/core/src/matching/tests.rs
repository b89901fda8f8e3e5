use super::*;
use crate::oracle::{brute_force_cover, max_matching_size, shortest_augmenting_length, ExplicitGraph};
use rand::Rng;

fn random_sets(rng: &mut impl Rng, w: &Rect, pa: f64, pb: f64) -> (CellSet, CellSet) {
    let bits_a: Vec<bool> = (0..w.volume()).map(|_| rng.random::<f64>() < pa).collect();
    let bits_b: Vec<bool> = (0..w.volume()).map(|_| rng.random::<f64>() < pb).collect();
    (
        CellSet::from_index_fn(w.clone(), |i| bits_a[i]),
        CellSet::from_index_fn(w.clone(), |i| bits_b[i]),
    )
}

fn explicit_mates(eg: &ExplicitGraph, m: &Matching) -> Vec<Option<usize>> {
    let w = m.window();
    eg.a_cells
        .iter()
        .map(|c| m.partner_of_a(w.index_of(c).unwrap()).map(|j| eg.b_index(&w.coords(j)).unwrap()))
        .collect()
}

#[test]
fn trivial_canonical_cases() {
    let w = Rect::cube(vec![0, 0], 6);
    let empty = CellSet::new(w.clone());
    let g = TranslationGraph::new(&empty, &empty, 2).unwrap();
    assert_eq!(canonical_max_matching(&g, &w).unwrap().size(), 0);
    let one = CellSet::from_cells(w.clone(), [&[2i64, 3][..]]);
    let g = TranslationGraph::new(&one, &one, 1).unwrap();
    let m = canonical_max_matching(&g, &w).unwrap();
    assert_eq!(m.size(), 1);
    assert_eq!(m.offset_of_a(w.index_of(&[2, 3]).unwrap()), Some(vec![0, 0]));
}

#[test]
fn identical_sets_match_to_themselves() {
    let mut rng = substream(1, "identity");
    let w = Rect::cube(vec![-5, 7], 16);
    let (a, _) = random_sets(&mut rng, &w, 0.4, 0.0);
    let g = TranslationGraph::new(&a, &a, 3).unwrap();
    let m = canonical_max_matching(&g, &w).unwrap();
    assert_eq!(m.size(), a.count());
    for (i, j) in m.edges() {
        assert_eq!(i, j);
    }
}

#[test]
fn canonical_size_matches_flow_oracle() {
    let mut rng = substream(2, "canonical-flow");
    let w = Rect::cube(vec![0, 0], 12);
    for _ in 0..1000 {
        let (pa, pb) = (rng.random_range(0.05..0.5), rng.random_range(0.05..0.5));
        let (a, b) = random_sets(&mut rng, &w, pa, pb);
        let g = TranslationGraph::new(&a, &b, 2).unwrap();
        let m = canonical_max_matching(&g, &w).unwrap();
        m.validate(&a, &b).unwrap();
        let eg = ExplicitGraph::induced(&a, &b, 2, &w);
        assert_eq!(m.size(), max_matching_size(&eg));
    }
}

#[test]
fn canonical_is_translation_covariant() {
    let mut rng = substream(3, "covariance");
    let big = Rect::cube(vec![0, 0], 40);
    let (a, b) = random_sets(&mut rng, &big, 0.3, 0.3);
    let g = TranslationGraph::new(&a, &b, 2).unwrap();
    let r1 = Rect::cube(vec![3, 4], 15);
    let shift = [11i64, -2];
    let r2 = r1.translate(&shift);
    // Copy the content of r1 into r2.
    let a2 = CellSet::from_fn(big.clone(), |c| {
        r2.contains(c) && a.contains(&[c[0] - shift[0], c[1] - shift[1]])
    });
    let b2 = CellSet::from_fn(big.clone(), |c| {
        r2.contains(c) && b.contains(&[c[0] - shift[0], c[1] - shift[1]])
    });
    let g2 = TranslationGraph::new(&a2, &b2, 2).unwrap();
    let m1 = canonical_max_matching(&g, &r1).unwrap();
    let m2 = canonical_max_matching(&g2, &r2).unwrap();
    for c in r1.cells() {
        let i = big.index_of(&c).unwrap();
        let c2: Vec<i64> = c.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let i2 = big.index_of(&c2).unwrap();
        assert_eq!(m1.offset_of_a(i), m2.offset_of_a(i2));
    }
}

#[test]
fn augmenting_path_examples() {
    let w = Rect::cube(vec![0, 0], 5);
    let a = CellSet::from_cells(w.clone(), [&[1i64, 1][..]]);
    let b = CellSet::from_cells(w.clone(), [&[1i64, 2][..]]);
    let g = TranslationGraph::new(&a, &b, 1).unwrap();
    let m = Matching::new(w.clone(), 1);
    let p = bounded_augmenting_path(&g, &w, &m, 5).unwrap();
    assert_eq!(p.len(), 1);
    let m2 = flip(&g, &m, &p).unwrap();
    assert_eq!(m2.size(), 1);
    assert!(bounded_augmenting_path(&g, &w, &m2, 100).is_none());
    assert!(flip(&g, &m2, &p).is_err());
}

#[test]
fn length_three_flip_rewires_middle() {
    // a0=(0,0), a1=(0,2); b0=(0,1) adjacent to both, b1=(0,3) adjacent to a1 only (M=1).
    let w = Rect::cube(vec![0, 0], 5);
    let a = CellSet::from_cells(w.clone(), [&[0i64, 0][..], &[0, 2][..]]);
    let b = CellSet::from_cells(w.clone(), [&[0i64, 1][..], &[0, 3][..]]);
    let g = TranslationGraph::new(&a, &b, 1).unwrap();
    let mut m = Matching::new(w.clone(), 1);
    m.insert(&[0, 2], &[0, 1]).unwrap();
    let p = bounded_augmenting_path(&g, &w, &m, 3).unwrap();
    assert_eq!(p.cells, vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![0, 3]]);
    assert!(bounded_augmenting_path(&g, &w, &m, 2).is_none());
    let m2 = flip(&g, &m, &p).unwrap();
    assert_eq!(m2.size(), 2);
    assert_eq!(m2.partner_of_a(w.index_of(&[0, 2]).unwrap()), w.index_of(&[0, 3]));
}

#[test]
fn bounded_search_agrees_with_uncapped_oracle() {
    let mut rng = substream(4, "bfs-oracle");
    let w = Rect::cube(vec![0, 0], 10);
    for _ in 0..1000 {
        let (pa, pb) = (rng.random_range(0.1..0.5), rng.random_range(0.1..0.5));
        let (a, b) = random_sets(&mut rng, &w, pa, pb);
        let g = TranslationGraph::new(&a, &b, 1).unwrap();
        // A random partial matching from random flips.
        let mut m = Matching::new(w.clone(), 1);
        for _ in 0..rng.random_range(0..30) {
            match bounded_augmenting_path(&g, &w, &m, rng.random_range(1..8)) {
                Some(p) => m = flip(&g, &m, &p).unwrap(),
                None => break,
            }
        }
        let eg = ExplicitGraph::induced(&a, &b, 1, &w);
        let truth = shortest_augmenting_length(&eg, &explicit_mates(&eg, &m));
        let cap = rng.random_range(1..20);
        let found = bounded_augmenting_path(&g, &w, &m, cap).map(|p| p.len());
        assert_eq!(found, truth.filter(|&l| l <= cap));
    }
}

#[test]
fn flip_counts_add_up() {
    let mut rng = substream(5, "flip-count");
    let w = Rect::cube(vec![0, 0], 14);
    let (a, b) = random_sets(&mut rng, &w, 0.3, 0.3);
    let g = TranslationGraph::new(&a, &b, 1).unwrap();
    let mut m = Matching::new(w.clone(), 1);
    let mut k = 0;
    while let Some(p) = bounded_augmenting_path(&g, &w, &m, 1000) {
        m = flip(&g, &m, &p).unwrap();
        m.validate(&a, &b).unwrap();
        k += 1;
        assert_eq!(m.size(), k);
    }
    assert_eq!(m.size(), max_matching_size(&ExplicitGraph::induced(&a, &b, 1, &w)));
}

#[test]
fn hall_examples() {
    let w = Rect::cube(vec![0, 0], 5);
    let a = CellSet::from_cells(w.clone(), [&[0i64, 0][..], &[0, 2][..]]);
    let b = CellSet::from_cells(w.clone(), [&[0i64, 1][..]]);
    let g = TranslationGraph::new(&a, &b, 1).unwrap();
    let none = CellSet::new(w.clone());
    assert!(hall_deficiency(&g, &w, &none, &none).is_none());
    let cert = hall_deficiency(&g, &w, &a, &none).unwrap();
    assert_eq!(cert.side, Side::A);
    assert_eq!(cert.set.len(), 2);
    assert_eq!(cert.neighbourhood, vec![vec![0, 1]]);
    assert!(hall_deficiency(&g, &w, &none, &b).is_none());
}

#[test]
fn hall_agrees_with_exhaustive_enumeration() {
    let mut rng = substream(6, "hall-oracle");
    let w = Rect::cube(vec![0, 0], 10);
    let mut done = 0;
    while done < 1000 {
        let (a, b) = random_sets(&mut rng, &w, 0.05, 0.05);
        let g = TranslationGraph::new(&a, &b, 1).unwrap();
        let eg = ExplicitGraph::induced(&a, &b, 1, &w);
        if eg.edge_count() > 12 {
            continue;
        }
        done += 1;
        let req_a: Vec<bool> = eg.a_cells.iter().map(|_| rng.random::<f64>() < 0.6).collect();
        let req_b: Vec<bool> = eg.b_cells.iter().map(|_| rng.random::<f64>() < 0.6).collect();
        let ra = CellSet::from_cells(w.clone(), eg.a_cells.iter().zip(&req_a).filter(|x| *x.1).map(|x| &x.0[..]));
        let rb = CellSet::from_cells(w.clone(), eg.b_cells.iter().zip(&req_b).filter(|x| *x.1).map(|x| &x.0[..]));
        let cert = hall_deficiency(&g, &w, &ra, &rb);
        assert_eq!(cert.is_none(), brute_force_cover(&eg, &req_a, &req_b));
        if let Some(c) = cert {
            assert!(c.neighbourhood.len() < c.set.len());
        }
    }
}

#[test]
fn expansion_complete_graph_margin() {
    let w = Rect::cube(vec![0, 0], 8);
    let mut rng = substream(7, "expansion");
    let (a, b) = random_sets(&mut rng, &w, 0.3, 0.9);
    let g = TranslationGraph::new(&a, &b, 8).unwrap();
    let audit = expansion_audit(&g, &w, 50, 1).unwrap();
    let b_total = b.count() as f64;
    for s in &audit.samples {
        assert_eq!(s.gamma as f64, b_total);
        assert!(s.size > 0);
        if b_total >= 2.0 * (s.size as f64 + 20.0 * (s.size as f64).sqrt()) {
            assert!(s.gamma as f64 - s.target >= 0.0);
        }
    }
}

proptest::proptest! {
    #[test]
    fn canonical_is_maximum_and_repeatable(a in proptest::collection::vec(proptest::bool::weighted(0.3), 100),
                                           b in proptest::collection::vec(proptest::bool::weighted(0.3), 100),
                                           m in 1i64..4) {
        let w = Rect::cube(vec![-3, 4], 10);
        let a = CellSet::from_index_fn(w.clone(), |i| a[i]);
        let b = CellSet::from_index_fn(w.clone(), |i| b[i]);
        let g = TranslationGraph::new(&a, &b, m as u32).unwrap();
        let first = canonical_max_matching(&g, &w).unwrap();
        first.validate(&a, &b).unwrap();
        let eg = ExplicitGraph::induced(&a, &b, m, &w);
        proptest::prop_assert_eq!(first.size(), max_matching_size(&eg));
        proptest::prop_assert!(first == canonical_max_matching(&g, &w).unwrap());
    }
}
