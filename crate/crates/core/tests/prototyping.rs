use linkevo_core::descriptors::{Descriptor, DescriptorSpace, GridDim, GridSpec};
use linkevo_core::evolve::{run_map_elites, Algorithm, Evaluation, PathSummary, Repertoire, RunConfig, Serial};
use linkevo_core::prototyping::{apply_overrides, build_sheet, downsample, snap_length, DEFAULT_PITCH};
use linkevo_core::{EncodingConfig, Genome};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn repertoire(space: DescriptorSpace, seed: u64) -> Repertoire {
    let cfg = RunConfig { algorithm: Algorithm::MapElites, space, batch_size: 500, iterations: 4, seed, steps: 36, ..RunConfig::default() };
    run_map_elites(&cfg, &Serial).repertoire
}

/// Best source cell of a display block by scanning every filled cell whose
/// displayed coordinates fall into the block's bin ranges.
fn brute_best(r: &Repertoire, rows: usize, cols: usize, (dc, dr): (usize, usize), row: usize, col: usize) -> Option<usize> {
    let (bc, br) = (r.grid.dims[dc].bins, r.grid.dims[dr].bins);
    // block k starts at the first bin b with b·blocks ≥ k·bins
    let col_range = (col * bc).div_ceil(cols)..((col + 1) * bc).div_ceil(cols);
    let row_range = (row * br).div_ceil(rows)..((row + 1) * br).div_ceil(rows);
    let mut best: Option<(usize, f64)> = None;
    for (cell, e) in r.iter() {
        let c = r.grid.unflatten(cell);
        if col_range.contains(&c[dc]) && row_range.contains(&c[dr]) {
            let s = r.score(e);
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((cell, s));
            }
        }
    }
    best.map(|(c, _)| c)
}

fn check_against_brute_force(r: &Repertoire, rows: usize, cols: usize, dims: (usize, usize)) {
    let map = downsample(r, rows, cols, dims).unwrap();
    let mut covered = 0;
    for row in 0..rows {
        for col in 0..cols {
            let expected = brute_best(r, rows, cols, dims, row, col);
            let got = map.get(row, col);
            assert_eq!(got.map(|c| c.source_cell), expected, "display cell ({row}, {col})");
            if let Some(c) = got {
                assert_eq!(&c.elite, r.get(c.source_cell).unwrap());
                covered += 1;
            }
        }
    }
    assert!(covered > 0);
    let max_scale = map.populated().map(|c| c.relative_scale).fold(0.0, f64::max);
    assert!((max_scale - 1.0).abs() < 1e-12);
}

#[test]
fn display_cells_hold_the_best_of_their_region() {
    let wh = repertoire(DescriptorSpace::Wh, 71);
    check_against_brute_force(&wh, 5, 5, (0, 1));
    check_against_brute_force(&wh, 5, 5, (1, 0));
    check_against_brute_force(&wh, 4, 7, (0, 1));
    let st = repertoire(DescriptorSpace::St, 72);
    check_against_brute_force(&st, 5, 5, (0, 1));
    check_against_brute_force(&st, 5, 5, (2, 3));
    check_against_brute_force(&st, 5, 5, (3, 0));
}

fn elite_at(x: f64, y: f64, fitness: f64, seed: u64) -> Evaluation {
    Evaluation {
        genome: Genome::random(&mut ChaCha8Rng::seed_from_u64(seed), &EncodingConfig::default()),
        fitness,
        objectives: None,
        descriptor: Some(Descriptor::new(DescriptorSpace::Wh, vec![x, y])),
        error_count: 0,
        summary: PathSummary::default(),
    }
}

#[test]
fn single_elite_gives_one_display_cell() {
    let cfg = RunConfig { space: DescriptorSpace::Wh, steps: 36, ..RunConfig::default() };
    let mut r = Repertoire::new(DescriptorSpace::Wh.default_grid(&cfg.encoding), cfg.meta(0, 0));
    assert_eq!(downsample(&r, 5, 5, (0, 1)).unwrap().populated().count(), 0);
    r.insert_elite(elite_at(250.0, 10.0, -3.0, 1));
    let map = downsample(&r, 5, 5, (0, 1)).unwrap();
    assert_eq!(map.populated().count(), 1);
    let c = map.get(0, 4).unwrap();
    assert_eq!((c.row, c.col), (0, 4));
}

#[test]
fn five_by_five_to_five_by_five_is_identity() {
    let cfg = RunConfig { space: DescriptorSpace::Wh, steps: 36, ..RunConfig::default() };
    let grid = GridSpec { dims: vec![GridDim::new(0.0, 5.0, 5), GridDim::new(0.0, 5.0, 5)] };
    let mut r = Repertoire::new(grid, cfg.meta(0, 0));
    let mut seed = 0;
    for x in 0..5 {
        for y in 0..5 {
            if (x + 2 * y) % 3 != 0 {
                seed += 1;
                r.insert_elite(elite_at(x as f64 + 0.5, y as f64 + 0.5, -(seed as f64), seed));
            }
        }
    }
    let map = downsample(&r, 5, 5, (0, 1)).unwrap();
    for x in 0..5 {
        for y in 0..5 {
            let source = r.grid.flatten(&[x, y]);
            assert_eq!(map.get(y, x).map(|c| &c.elite), r.get(source));
        }
    }
}

#[test]
fn invalid_display_requests_fail() {
    let r = repertoire(DescriptorSpace::Wh, 73);
    assert!(downsample(&r, 0, 5, (0, 1)).is_err());
    assert!(downsample(&r, 5, 5, (0, 2)).is_err());
    assert!(downsample(&r, 5, 5, (1, 1)).is_err());
}

proptest! {
    #[test]
    fn snapping_error_is_at_most_half_a_pitch(len in 4.0..400.0f64, pitch in 1.0..20.0f64) {
        let s = snap_length(len, pitch);
        let holes = s / pitch;
        prop_assert!((holes - holes.round()).abs() < 1e-9);
        prop_assert!(holes >= 1.0 - 1e-9);
        if len >= pitch / 2.0 {
            prop_assert!((s - len).abs() <= pitch / 2.0 + 1e-9);
        }
    }
}

#[test]
fn ties_round_up() {
    for n in 1..30 {
        let tie = (n as f64 + 0.5) * DEFAULT_PITCH;
        assert_eq!(snap_length(tie, DEFAULT_PITCH), (n + 1) as f64 * DEFAULT_PITCH);
    }
}

#[test]
fn build_sheet_resimulates_snapped_linkage() {
    let r = repertoire(DescriptorSpace::Lis, 74);
    let meta = &r.meta;
    for e in r.elites().take(100) {
        let sheet = build_sheet(e, DEFAULT_PITCH, meta).unwrap();
        let linkage = e.genome.decode(&meta.encoding);
        assert_eq!(sheet.beams.len(), linkage.beam_count());
        assert_eq!(sheet.evolved_fitness, e.fitness);
        let mut snapped = linkage.clone();
        for (part, beam) in sheet.beams.iter().zip(linkage.beams()) {
            assert_eq!(part.evolved_length, beam.length);
            assert_eq!((part.a, part.b), (beam.a, beam.b));
            assert_eq!(part.snapped_length, part.holes as f64 * DEFAULT_PITCH);
            assert!((part.snapped_length - part.evolved_length).abs() <= DEFAULT_PITCH / 2.0);
            snapped.set_beam_length(part.index, part.snapped_length).unwrap();
        }
        let trace = snapped.solve(meta.steps);
        assert_eq!(sheet.snapped_error_count, trace.error_count);
        assert_eq!(sheet.snapped_fitness, meta.fitness.evaluate(&trace, &meta.targets));
        assert_eq!(sheet.fitness_delta(), sheet.snapped_fitness - sheet.evolved_fitness);
        assert_eq!(sheet.infeasible, trace.error_count == meta.steps);
    }
}

#[test]
fn overrides_reject_bad_beams() {
    let l = Genome::random(&mut ChaCha8Rng::seed_from_u64(3), &EncodingConfig::default()).decode(&EncodingConfig::default());
    let mut m = l.clone();
    assert!(apply_overrides(&mut m, &[(l.beam_count(), 10.0)]).is_err());
    assert!(apply_overrides(&mut m, &[(0, -1.0)]).is_err());
    assert!(apply_overrides(&mut m, &[(0, f64::NAN)]).is_err());
    apply_overrides(&mut m, &[(0, 33.0)]).unwrap();
    assert_eq!(m.crank_length, 33.0);
}
