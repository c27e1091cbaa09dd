mod common;

use std::io::Cursor;

use common::{archive_of, bytes, me_archive, small};
use linkevo::archive::{read_header, Archive, ArchiveKind};
use linkevo::checkpoint::{read_checkpoint, write_checkpoint};
use linkevo::config::RunFile;
use linkevo::exec::Pool;
use linkevo::metrics::{read_metrics, MetricsLog};
use linkevo::targets::{read_targets, write_targets};
use linkevo::Error;
use linkevo_core::aurora::{Autoencoder, PathVector, TrainOptions};
use linkevo_core::descriptors::DescriptorSpace;
use linkevo_core::evolve::{run_map_elites, Algorithm, IterationRecord, RunConfig, Serial};
use linkevo_core::fitness::{FitnessKind, TargetPointSet};
use linkevo_core::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn read(b: &[u8]) -> Result<Archive, Error> {
    Archive::read(Cursor::new(b))
}

fn lines(a: &Archive) -> Vec<String> {
    String::from_utf8(bytes(a)).unwrap().lines().map(String::from).collect()
}

fn from_lines(lines: &[String]) -> Result<Archive, Error> {
    read(lines.join("\n").as_bytes())
}

#[test]
fn repertoire_round_trip_is_byte_identical() {
    for space in [DescriptorSpace::Wh, DescriptorSpace::Lis, DescriptorSpace::St] {
        let cfg = small(Algorithm::MapElites, space, 3);
        let rep = run_map_elites(&cfg, &Serial).repertoire;
        let a = Archive::from_repertoire(&rep, None);
        assert_eq!(a.header.kind, ArchiveKind::Repertoire);
        assert_eq!(a.records.len(), rep.len());
        let first = bytes(&a);
        let back = read(&first).unwrap();
        assert_eq!(back, a);
        assert_eq!(bytes(&back), first);
        assert_eq!(back.to_repertoire().unwrap(), rep);
        assert_eq!(back.coverage(), Some(rep.coverage()));
        assert_eq!(back.best().unwrap().fitness, rep.best().unwrap().fitness);
    }
}

#[test]
fn population_round_trip() {
    for algo in [Algorithm::Ea, Algorithm::Nsga2] {
        let a = archive_of(&small(algo, DescriptorSpace::Lis, 4), &Serial);
        assert_eq!(a.header.kind, ArchiveKind::Population);
        assert_eq!(a.records.len(), 200);
        assert!(a.records.iter().enumerate().all(|(i, r)| r.cell == i));
        assert_eq!(a.records.iter().all(|r| r.objectives.is_some()), algo == Algorithm::Nsga2);
        let back = read(&bytes(&a)).unwrap();
        assert_eq!(back, a);
        assert!(back.to_repertoire().is_err());
        assert_eq!(back.coverage(), None);
    }
}

#[test]
fn save_and_load_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.jsonl");
    let a = me_archive(DescriptorSpace::Wh, 5);
    a.save(&path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), bytes(&a));
    assert_eq!(Archive::load(&path).unwrap(), a);
    assert_eq!(read_header(&path).unwrap(), a.header);
    let missing = Archive::load(&dir.path().join("nope.jsonl")).unwrap_err();
    assert!(matches!(missing, Error::Io { .. }), "{missing}");
}

#[test]
fn corrupt_archives_are_rejected() {
    let a = me_archive(DescriptorSpace::Lis, 6);
    assert!(a.records.len() >= 3);
    let good = lines(&a);
    assert!(from_lines(&good).is_ok());

    let err = |mutate: &dyn Fn(&mut Vec<String>)| {
        let mut l = good.clone();
        mutate(&mut l);
        from_lines(&l).unwrap_err().to_string()
    };

    assert!(read(b"").is_err());
    assert!(err(&|l| l[0] = l[0].replace("linkevo-archive", "something-else")).contains("not an archive"));
    assert!(err(&|l| l[0] = l[0].replace("\"version\":1", "\"version\":9")).contains("version"));
    assert!(err(&|l| {
        l.pop();
    })
    .contains("announces"));
    let dup = |l: &mut Vec<String>| {
        let second = l[2].clone();
        let cell_of = |s: &str| serde_json::from_str::<serde_json::Value>(s).unwrap()["cell"].as_u64().unwrap();
        l[1] = l[1].replacen(&format!("\"cell\":{}", cell_of(&l[1])), &format!("\"cell\":{}", cell_of(&second)), 1);
    };
    assert!(err(&dup).contains("twice"));
    assert!(err(&|l| {
        let mut v: serde_json::Value = serde_json::from_str(&l[1]).unwrap();
        v["cell"] = 10_000_000.into();
        l[1] = v.to_string();
    })
    .contains("outside the grid"));
    assert!(err(&|l| {
        let mut v: serde_json::Value = serde_json::from_str(&l[1]).unwrap();
        v["genome"]["genes"][0] = 1.5.into();
        l[1] = v.to_string();
    })
    .contains("outside [0, 1]"));
    assert!(err(&|l| {
        let mut v: serde_json::Value = serde_json::from_str(&l[1]).unwrap();
        v["genome"]["genes"].as_array_mut().unwrap().pop();
        l[1] = v.to_string();
    })
    .contains("genes"));
    let garbled = err(&|l| l[2] = "{not json".into());
    assert!(garbled.starts_with("line 3"), "{garbled}");
}

#[test]
fn checkpoint_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ae = Autoencoder::with_sizes(&[6, 5, 2, 5, 6], 2, &mut rng);
    let data: Vec<PathVector> = (0..20).map(|_| PathVector((0..6).map(|_| rng.random_range(-1.0..1.0)).collect())).collect();
    ae.train(&data, 5, &TrainOptions { batch_size: 8, ..TrainOptions::default() }, &mut rng);

    let mut out = Vec::new();
    write_checkpoint(&ae, &mut out).unwrap();
    let text = String::from_utf8(out.clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    let back = read_checkpoint(Cursor::new(&out)).unwrap();
    assert_eq!(back, ae);
    let mut again = Vec::new();
    write_checkpoint(&back, &mut again).unwrap();
    assert_eq!(again, out);

    let mut truncated: Vec<&str> = text.lines().collect();
    truncated.pop();
    assert!(read_checkpoint(Cursor::new(truncated.join("\n"))).is_err());

    let mut v: serde_json::Value = serde_json::from_str(text.lines().nth(2).unwrap()).unwrap();
    v["biases"].as_array_mut().unwrap().pop();
    let mut edited: Vec<String> = text.lines().map(String::from).collect();
    edited[2] = v.to_string();
    assert!(read_checkpoint(Cursor::new(edited.join("\n"))).is_err());
    assert!(read_checkpoint(Cursor::new(text.replace("linkevo-autoencoder", "other"))).is_err());
}

#[test]
fn full_size_checkpoint_round_trip() {
    let ae = Autoencoder::new(&mut ChaCha8Rng::seed_from_u64(1));
    let mut out = Vec::new();
    write_checkpoint(&ae, &mut out).unwrap();
    assert_eq!(read_checkpoint(Cursor::new(&out)).unwrap(), ae);
}

#[test]
fn target_csv() {
    let text = "# target points\nx, y, set\n-20, -80, step\n 0,-80,step\n20,-80 ,step\n0, -60, lift\n";
    let t = read_targets(text.as_bytes()).unwrap();
    assert_eq!(t.step_points, vec![Point::new(-20.0, -80.0), Point::new(0.0, -80.0), Point::new(20.0, -80.0)]);
    assert_eq!(t.lift_points, vec![Point::new(0.0, -60.0)]);

    let d = TargetPointSet::default();
    let mut out = Vec::new();
    write_targets(&d, &mut out).unwrap();
    assert_eq!(read_targets(out.as_slice()).unwrap(), d);

    assert!(read_targets("x,y,set\n1,2,step\n".as_bytes()).is_err());
    assert!(read_targets("x,y,set\n1,2,step\nNaN,2,lift\n".as_bytes()).is_err());
    assert!(read_targets("x,y,set\n1,2,step\n1,2,hop\n".as_bytes()).is_err());
    assert!(read_targets("x,y,set\n1,oops,step\n1,2,lift\n".as_bytes()).is_err());
}

#[test]
fn toml_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pts.csv"), "x,y,set\n0,-70,step\n10,-70,step\n5,-50,lift\n").unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(
        &path,
        r#"
algorithm = "me"
fitness = "fsl"
space = "wh"
budget = 1000
batch_size = 200
seed = 7
targets = "pts.csv"

[encoding]
n_joints = 6

[grid]
dims = [{ lo = 0.0, hi = 200.0, bins = 10 }, { lo = 0.0, hi = 100.0, bins = 20 }]
"#,
    )
    .unwrap();
    let file = RunFile::load(&path).unwrap();
    assert_eq!(file.targets.as_deref(), Some(dir.path().join("pts.csv").as_path()));
    let cfg = file.to_config().unwrap();
    assert_eq!(cfg.algorithm, Algorithm::MapElites);
    assert_eq!(cfg.fitness, FitnessKind::Fsl);
    assert_eq!(cfg.space, DescriptorSpace::Wh);
    assert_eq!((cfg.batch_size, cfg.iterations, cfg.evaluations()), (200, 4, 1000));
    assert_eq!(cfg.encoding.n_joints, 6);
    assert_eq!(cfg.targets.step_points.len(), 2);
    assert_eq!(cfg.grid.as_ref().unwrap().total_cells(), 200);

    let flags = RunFile { iterations: Some(2), seed: Some(9), ..RunFile::default() };
    let merged = file.clone().merge(flags).to_config().unwrap();
    assert_eq!((merged.iterations, merged.seed, merged.fitness), (2, 9, FitnessKind::Fsl));

    assert_eq!(RunFile { budget: Some(50_000), ..RunFile::default() }.to_config().unwrap().iterations, 9);
    assert_eq!(RunFile::default().to_config().unwrap(), RunConfig::default());

    assert!(RunFile::parse("colour = \"red\"").is_err());
    assert!(RunFile::parse("budget = 10\niterations = 2").unwrap().to_config().is_err());
    assert!(RunFile::parse("budget = 100").unwrap().to_config().is_err());
    assert!(RunFile::parse("space = \"wh\"\n[grid]\ndims = [{ lo = 0.0, hi = 1.0, bins = 4 }]").unwrap().to_config().is_err());
    assert!(RunFile::parse("batch_size = 0").unwrap().to_config().is_err());
}

#[test]
fn metrics_log_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.jsonl");
    let records = vec![
        IterationRecord { iteration: 0, evaluations: 200, best_fitness: None, coverage: Some(0.0), qd_score: Some(0.0), front_size: None },
        IterationRecord { iteration: 1, evaluations: 400, best_fitness: Some(-12.5), coverage: Some(0.01), qd_score: Some(3.25), front_size: None },
        IterationRecord { iteration: 2, evaluations: 600, best_fitness: Some(0.1 + 0.2), coverage: None, qd_score: None, front_size: Some(17) },
    ];
    let mut log = MetricsLog::create(&path).unwrap();
    for r in &records {
        log.append(r).unwrap();
        assert_eq!(read_metrics(&path).unwrap().len(), r.iteration + 1, "flushed per line");
    }
    assert_eq!(read_metrics(&path).unwrap(), records);
    assert!(!std::fs::read_to_string(&path).unwrap().lines().next().unwrap().contains("best_fitness"));
}

#[test]
fn archives_do_not_depend_on_worker_count() {
    let one = Pool::new(1).unwrap();
    let four = Pool::new(4).unwrap();
    assert_eq!((one.workers(), four.workers()), (1, 4));
    let runs = [
        (Algorithm::Ea, DescriptorSpace::Lis),
        (Algorithm::Nsga2, DescriptorSpace::Lis),
        (Algorithm::MapElites, DescriptorSpace::Wh),
        (Algorithm::MapElites, DescriptorSpace::Lis),
        (Algorithm::MapElites, DescriptorSpace::St),
    ];
    for (algo, space) in runs {
        let cfg = small(algo, space, 11);
        let serial = bytes(&archive_of(&cfg, &Serial));
        assert_eq!(bytes(&archive_of(&cfg, &one)), serial, "{algo:?} {space:?}");
        assert_eq!(bytes(&archive_of(&cfg, &four)), serial, "{algo:?} {space:?}");
    }
}

#[test]
fn learned_space_runs_do_not_depend_on_worker_count() {
    let cfg = RunConfig { iterations: 4, ..small(Algorithm::MapElites, DescriptorSpace::Au, 12) };
    let save = |pool: &Pool| {
        let r = run_map_elites(&cfg, pool);
        let mut ae = Vec::new();
        write_checkpoint(r.autoencoder.as_ref().unwrap(), &mut ae).unwrap();
        (bytes(&Archive::from_repertoire(&r.repertoire, Some("x.ae.jsonl".into()))), ae)
    };
    let a = save(&Pool::new(1).unwrap());
    let b = save(&Pool::new(3).unwrap());
    assert!(a == b);
}

#[test]
fn worker_count_from_environment() {
    use linkevo::exec::{workers_from_env, WORKERS_ENV};
    std::env::set_var(WORKERS_ENV, "3");
    assert_eq!(workers_from_env().unwrap(), 3);
    assert_eq!(Pool::from_env().unwrap().workers(), 3);
    std::env::set_var(WORKERS_ENV, "many");
    assert!(workers_from_env().is_err());
    std::env::remove_var(WORKERS_ENV);
    assert_eq!(workers_from_env().unwrap(), 0);
}
