use std::path::PathBuf;

use meshmorph::harness::Config;

fn config_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn bundled_configs_load_and_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(config_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = Config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.validate()
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            cfg.prepare()
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            if let Some(s) = &cfg.sweep {
                assert!(!s.grid().unwrap().is_empty());
            }
            n += 1;
        }
    }
    assert!(n >= 5);
}

#[test]
fn relative_motion_file_resolves_against_config() {
    use meshmorph::harness::{run_case, Model};
    use meshmorph::problem::{
        build_problem, synthetic_beam_deflection, write_motion_csv, ProblemSpec,
    };

    let dir = tempfile::tempdir().unwrap();
    let spec = ProblemSpec::beam();
    let mesh = build_problem(&spec).unwrap();
    let motion = synthetic_beam_deflection(&mesh, &spec, 0.05).unwrap();
    write_motion_csv(&motion, &dir.path().join("tip.csv")).unwrap();
    let cfg_path = dir.path().join("c.toml");
    std::fs::write(
        &cfg_path,
        "[problem]\ncase = \"beam\"\n[motion]\nmode = \"from_file\"\npath = \"tip.csv\"\n[linear_elastic]\n",
    )
    .unwrap();
    let from_file = run_case(&Config::load(&cfg_path).unwrap()).unwrap();
    let inline = run_case(
        &Config::from_toml("[problem]\ncase = \"beam\"\n[motion]\nmode = \"cantilever\"\ntip = 0.05\n[linear_elastic]\n")
            .unwrap(),
    )
    .unwrap();
    let s = |r: &meshmorph::harness::CaseResult| {
        r.evaluation(Model::LinearElastic)
            .unwrap()
            .min_skewness()
            .unwrap()
    };
    assert_eq!(from_file.rows.len(), 1);
    assert!((s(&from_file) - s(&inline)).abs() < 1e-12);
}
