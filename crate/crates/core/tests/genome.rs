use linkevo_core::genome::{bounce_back, EXTENSION_THRESHOLD, SECTION_LEN};
use linkevo_core::{EncodingConfig, Genome};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_genes_average_one_half() {
    let cfg = EncodingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 10_000;
    let mut sums = vec![0.0; cfg.genome_len()];
    for _ in 0..n {
        let g = Genome::random(&mut rng, &cfg);
        for (s, v) in sums.iter_mut().zip(&g.genes) {
            *s += v;
        }
    }
    for s in sums {
        assert!((s / n as f64 - 0.5).abs() < 0.02);
    }
}

#[test]
fn mutation_keeps_everything_in_range() {
    let cfg = EncodingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut g = Genome::random(&mut rng, &cfg);
    g.sigma = 1.0;
    for i in 0..100_000 {
        let child = g.mutate(&mut rng);
        assert_eq!(child.genes.len(), g.genes.len());
        assert!(child.genes.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!((0.0..=1.0).contains(&child.sigma));
        // walk the lineage so sigma explores its whole range
        if i % 10 == 0 {
            g = child;
        }
    }
}

#[test]
fn length_genes_always_move() {
    let cfg = EncodingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 10_000;
    let mut unchanged = 0usize;
    let mut total = 0usize;
    let mut other_changed = 0usize;
    let mut other_total = 0usize;
    for _ in 0..trials {
        let g = Genome::random(&mut rng, &cfg);
        let child = g.mutate(&mut rng);
        let lengths = g.length_gene_indices();
        for i in 0..g.genes.len() {
            if lengths.contains(&i) {
                total += 1;
                unchanged += (child.genes[i] == g.genes[i]) as usize;
            } else {
                other_total += 1;
                other_changed += (child.genes[i] != g.genes[i]) as usize;
            }
        }
    }
    assert!((unchanged as f64 / total as f64) < 1e-3);
    let rate = other_changed as f64 / other_total as f64;
    assert!((rate - 0.2).abs() < 0.01, "non-length mutation rate {rate}");
}

#[test]
fn length_slots_follow_joint_type() {
    let cfg = EncodingConfig { n_joints: 2, ..Default::default() };
    let mut genes = vec![0.5; cfg.genome_len()];
    genes[SECTION_LEN] = EXTENSION_THRESHOLD - 0.01;
    genes[2 * SECTION_LEN] = EXTENSION_THRESHOLD;
    let g = Genome::new(genes, 0.1);
    assert_eq!(g.length_gene_indices(), vec![6, 12, 19, 20]);
}

#[test]
fn decode_is_pure() {
    let cfg = EncodingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let g = Genome::random(&mut rng, &cfg);
        assert_eq!(g.decode(&cfg), g.clone().decode(&cfg));
    }
}

proptest! {
    #[test]
    fn bounce_back_lands_in_unit_interval(v in -50.0..50.0f64) {
        let b = bounce_back(v);
        prop_assert!((0.0..=1.0).contains(&b));
        // reflection preserves the distance to the nearest even integer
        let folded = v.rem_euclid(2.0);
        let expect = if folded > 1.0 { 2.0 - folded } else { folded };
        prop_assert!((b - expect).abs() < 1e-9);
    }

    #[test]
    fn every_genome_decodes(seed in any::<u64>(), joints in 1usize..12) {
        let cfg = EncodingConfig { n_joints: joints, ..Default::default() };
        let g = Genome::random(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let l = g.decode(&cfg);
        prop_assert_eq!(l.joints.len(), joints);
        prop_assert!(l.beams().iter().all(|b| b.length > 0.0 && b.a < l.node_count() && b.b < l.node_count()));
    }
}
