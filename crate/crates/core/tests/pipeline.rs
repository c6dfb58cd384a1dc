use std::path::Path;

use setforge_core::agents::StructuredParams;
use setforge_core::pipeline::{demo, generate, import_json, Input, PipelineConfig, PipelineError, Stage};

fn config(out: &Path, name: &str) -> (PipelineConfig, tempfile::NamedTempFile) {
    let mut fx = tempfile::NamedTempFile::new().unwrap();
    std::io::Write::write_all(&mut fx, demo::fixtures(name).unwrap().as_bytes()).unwrap();
    let mut cfg = PipelineConfig {
        output_dir: out.to_path_buf(),
        ..PipelineConfig::default()
    };
    cfg.backend.fixtures = Some(fx.path().to_path_buf());
    (cfg, fx)
}

fn run_demo(out: &Path, name: &str) -> setforge_core::pipeline::RunReport {
    let (cfg, _fx) = config(out, name);
    generate(&cfg, Input::Description(demo::description(name).unwrap().into())).unwrap()
}

fn files_in(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    v.sort();
    v
}

#[test]
fn western_guestroom_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_demo(dir.path(), "western_guestroom");
    assert_eq!(r.stages, Stage::ORDER);
    assert_eq!(r.turns, 8);
    assert_eq!(
        files_in(dir.path()),
        [
            "floorplan.svg",
            "manifest.json",
            "params.json",
            "scene.json",
            "scene.mtl",
            "scene.obj"
        ]
    );
    // Every file but the manifest is listed with its hash.
    for name in files_in(dir.path()).iter().filter(|n| *n != "manifest.json") {
        let bytes = std::fs::read(dir.path().join(name)).unwrap();
        let entry = r.manifest.get(name).unwrap();
        assert_eq!(entry.sha256, setforge_core::pipeline::sha256_hex(&bytes), "{name}");
    }
    let g = import_json(&std::fs::read(dir.path().join("scene.json")).unwrap()).unwrap();
    for id in [
        "room1",
        "room1_floor",
        "room1_id4",
        "arc1",
        "outer",
        "room1.obj1",
        "room3_id1.door1",
    ] {
        assert!(g.find(id).is_some(), "{id} missing");
    }
    assert!(r.layout.iter().all(|s| s.dropped.is_empty()), "{:?}", r.layout);
}

#[test]
fn chinese_residence_runs_six_turns() {
    let dir = tempfile::tempdir().unwrap();
    let r = run_demo(dir.path(), "chinese_residence");
    assert_eq!(r.turns, 6);
    let g = import_json(&std::fs::read(dir.path().join("scene.json")).unwrap()).unwrap();
    assert!(g.find("column_0_0").is_some() && g.find("beam_0").is_some());
    assert_eq!(
        g.find("column_0_0").unwrap().material_ref.as_deref(),
        Some("red_lacquer_timber")
    );
    let doors = g.attribute_ids().into_iter().filter(|id| id.contains(".door")).count();
    assert_eq!(doors, 2);
}

#[test]
fn prebuilt_params_reproduce_the_chain_run() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let r = run_demo(a.path(), "western_guestroom");
    let params = StructuredParams::from_json(&std::fs::read_to_string(a.path().join("params.json")).unwrap()).unwrap();
    assert_eq!(params, r.params);
    let (cfg, _fx) = config(b.path(), "western_guestroom");
    let r2 = generate(&cfg, Input::Params(Box::new(params))).unwrap();
    assert_eq!(r2.turns, 0);
    for f in ["scene.json", "scene.obj", "floorplan.svg"] {
        assert_eq!(r.manifest.get(f), r2.manifest.get(f), "{f}");
    }
}

#[test]
fn missing_catalog_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (mut cfg, _fx) = config(&out, "western_guestroom");
    cfg.catalog_path = Some(dir.path().join("nope.json"));
    let e = generate(&cfg, Input::Description("x".into())).unwrap_err();
    assert!(matches!(e, PipelineError::Config(_)), "{e}");
    assert!(!out.exists());
}

#[test]
fn stage_error_names_stage_and_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let (cfg, _fx) = config(&out, "western_guestroom");
    let good = run_demo(&dir.path().join("first"), "western_guestroom").params;
    let mut bad = good.clone();
    bad.openings.as_mut().unwrap()[1].target = "room9_id2".into();
    let e = generate(&cfg, Input::Params(Box::new(bad))).unwrap_err();
    match e {
        PipelineError::Stage { stage, path, .. } => {
            assert_eq!(stage, Stage::Openings);
            assert_eq!(path, "openings[1].target");
        }
        other => panic!("{other}"),
    }
    assert!(!out.exists() || files_in(&out).is_empty());

    let mut bad = good;
    bad.materials.as_mut().unwrap()[0].target = "room7_floor".into();
    let e = generate(&cfg, Input::Params(Box::new(bad))).unwrap_err();
    assert!(
        matches!(&e, PipelineError::Stage { stage: Stage::Materials, path, .. } if path == "materials[0].target"),
        "{e}"
    );
}

#[test]
fn svg_is_well_formed() {
    for name in demo::DEMOS {
        let dir = tempfile::tempdir().unwrap();
        run_demo(dir.path(), name);
        let text = std::fs::read_to_string(dir.path().join("floorplan.svg")).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }
}
