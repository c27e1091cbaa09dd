mod common;

use common::{me_archive, small};
use linkevo::svg::{self, heatmap, path_scale, paths, ramp, CELL};
use linkevo_core::descriptors::DescriptorSpace;
use linkevo_core::evolve::{Algorithm, Repertoire};
use linkevo_core::fitness::FitnessKind;
use linkevo_core::prototyping::downsample;
use linkevo_core::Genome;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Elements whose start tag contains `class="<class>"`.
fn elements<'a>(doc: &'a str, class: &str) -> Vec<&'a str> {
    let needle = format!("class=\"{class}\"");
    doc.lines().filter(|l| l.contains(&needle)).collect()
}

fn attr<'a>(el: &'a str, name: &str) -> &'a str {
    let key = format!(" {name}=\"");
    let start = el.find(&key).unwrap_or_else(|| panic!("{name} missing in {el}")) + key.len();
    let len = el[start..].find('"').unwrap();
    &el[start..start + len]
}

fn num(el: &str, name: &str) -> f64 {
    attr(el, name).parse().unwrap()
}

fn well_formed(doc: &str) {
    assert!(doc.starts_with("<svg "), "{}", &doc[..40.min(doc.len())]);
    assert!(doc.trim_end().ends_with("</svg>"));
    assert_eq!(doc.matches("<svg").count(), 1);
}

#[test]
fn single_elite_heatmap_has_one_cell() {
    let cfg = small(Algorithm::MapElites, DescriptorSpace::Wh, 0);
    let evaluator = cfg.evaluator();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let e = loop {
        let e = evaluator.evaluate(&Genome::random(&mut rng, &cfg.encoding), None);
        if e.descriptor.is_some() {
            break e;
        }
    };
    let mut rep = Repertoire::new(DescriptorSpace::Wh.default_grid(&cfg.encoding), cfg.meta(0, 1));
    assert!(rep.insert_elite(e.clone()));
    let map = downsample(&rep, 5, 5, (0, 1)).unwrap();
    let doc = heatmap(&map, FitnessKind::Fp, ("w", "h"));
    well_formed(&doc);
    let cells = elements(&doc, "cell");
    assert_eq!(cells.len(), 1);
    let shown = map.populated().next().unwrap();
    assert_eq!(num(cells[0], "data-fitness"), e.fitness);
    assert_eq!(attr(cells[0], "data-row"), shown.row.to_string());
    assert_eq!(attr(cells[0], "data-col"), shown.col.to_string());
    assert_eq!(attr(cells[0], "fill"), ramp(1.0));
}

#[test]
fn heatmap_colours_follow_fitness() {
    let a = me_archive(DescriptorSpace::Lis, 1);
    let rep = a.to_repertoire().unwrap();
    let map = downsample(&rep, 5, 5, (0, 1)).unwrap();
    let doc = heatmap(&map, rep.fitness_kind(), ("x", "y"));
    well_formed(&doc);
    let cells = elements(&doc, "cell");
    assert_eq!(cells.len(), map.populated().count());
    let kind = rep.fitness_kind();
    let best = cells.iter().map(|c| kind.score(num(c, "data-fitness"))).fold(f64::NEG_INFINITY, f64::max);
    let worst = cells.iter().map(|c| kind.score(num(c, "data-fitness"))).fold(f64::INFINITY, f64::min);
    assert!(best > worst);
    for c in &cells {
        let s = kind.score(num(c, "data-fitness"));
        if s == best {
            assert_eq!(attr(c, "fill"), ramp(1.0));
        }
        if s == worst {
            assert_eq!(attr(c, "fill"), ramp(0.0));
        }
        let d = map.get(attr(c, "data-row").parse().unwrap(), attr(c, "data-col").parse().unwrap()).unwrap();
        assert_eq!(num(c, "data-fitness"), d.elite.fitness);
    }
}

#[test]
fn path_map_scale_annotation_matches_geometry() {
    let a = me_archive(DescriptorSpace::Wh, 2);
    let map = downsample(&a.to_repertoire().unwrap(), 5, 5, (0, 1)).unwrap();
    let doc = paths(&map, ("w", "h"));
    well_formed(&doc);
    let lines = elements(&doc, "path");
    let scales = elements(&doc, "scale");
    assert_eq!(lines.len(), map.populated().count());
    assert_eq!(scales.len(), lines.len());
    for (line, scale) in lines.iter().zip(&scales) {
        let d = map.get(attr(line, "data-row").parse().unwrap(), attr(line, "data-col").parse().unwrap()).unwrap();
        let xs: Vec<f64> = d.foot_path.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = d.foot_path.iter().map(|p| p.y).collect();
        let span = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min);
        let extent = span(&xs).max(span(&ys));
        let k = num(scale, "data-scale");
        if extent > 0.0 {
            assert!((k - CELL / extent).abs() <= 1e-12 * k, "{k} vs {}", CELL / extent);
            let label: f64 = scale.rsplit_once('>').unwrap().0.rsplit_once('>').unwrap().1.trim_end_matches("</text").parse().unwrap();
            assert!((label - k).abs() <= 0.005 + 1e-12);
            // the drawn polyline spans one cell along its longer side
            let pts: Vec<(f64, f64)> = attr(line, "points")
                .split(' ')
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect();
            let px: Vec<f64> = pts.iter().map(|p| p.0).collect();
            let py: Vec<f64> = pts.iter().map(|p| p.1).collect();
            assert!((span(&px).max(span(&py)) - CELL).abs() < 2e-3);
        } else {
            assert_eq!(k, 0.0);
            assert!(scale.contains(">n/a<"));
        }
    }
}

#[test]
fn linkage_drawing_shows_every_beam_and_node() {
    let a = me_archive(DescriptorSpace::Lis, 3);
    let rec = a.records.iter().find(|r| r.error_count == 0).unwrap();
    let l = rec.genome.decode(&a.header.run.encoding);
    let t = l.solve(36);
    let doc = svg::linkage(&l, &t, Some(5), "caption <&>");
    well_formed(&doc);
    assert!(doc.contains("caption &lt;&amp;&gt;"));
    assert_eq!(elements(&doc, "beam").len(), l.beam_count());
    assert_eq!(elements(&doc, "motor").len(), 1);
    assert_eq!(elements(&doc, "static").len(), 3);
    assert_eq!(elements(&doc, "foot").len(), 1);
    assert_eq!(elements(&doc, "joint").len(), l.node_count() - 5);
    assert_eq!(elements(&doc, "foot-path").len(), 1);
    let moving = t.moving.iter().filter(|m| **m).count();
    assert_eq!(elements(&doc, "trajectory").len(), moving - 1);
}

#[test]
fn infeasible_linkage_draws_no_beams() {
    let cfg = small(Algorithm::MapElites, DescriptorSpace::Lis, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (l, t) = loop {
        let l = Genome::random(&mut rng, &cfg.encoding).decode(&cfg.encoding);
        let t = l.solve(36);
        if t.error_count == 36 {
            break (l, t);
        }
    };
    let doc = svg::linkage(&l, &t, None, "");
    well_formed(&doc);
    assert!(elements(&doc, "beam").is_empty());
}

#[test]
fn ramp_endpoints() {
    assert_eq!(ramp(0.0), "#440154");
    assert_eq!(ramp(1.0), "#fde725");
    assert_eq!(ramp(f64::NAN), ramp(0.0));
    assert_eq!(ramp(7.0), ramp(1.0));
    assert_eq!(path_scale(50.0), Some(2.0));
    assert_eq!(path_scale(0.0), None);
}

proptest! {
    #[test]
    fn ramp_is_a_colour(t in -1.0f64..2.0) {
        let c = ramp(t);
        prop_assert_eq!(c.len(), 7);
        prop_assert!(c.starts_with('#') && c[1..].chars().all(|ch| ch.is_ascii_hexdigit()));
    }
}
