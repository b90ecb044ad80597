use harvest_core::Error;
use harvest_harness::config::{apply_override, AgentKind};
use harvest_harness::Config;

fn load(overrides: &[&str]) -> harvest_core::Result<Config> {
    let owned: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    Config::load(None, &owned)
}

#[test]
fn empty_document_is_the_default() {
    let cfg = Config::parse("").unwrap();
    let mut expected = Config::default();
    expected.train.embed = expected.embed.clone();
    assert_eq!(cfg, expected);
}

#[test]
fn overrides_parse_values_and_bare_strings() {
    let cfg = load(&["experiment.agent=ppr", "experiment.budget=33", "embed.algorithm=pca"]).unwrap();
    assert_eq!(cfg.experiment.agent, AgentKind::Ppr);
    assert_eq!(cfg.experiment.budget, 33);
    assert_eq!(cfg.train.embed, cfg.embed, "training inherits the embedding table");
}

#[test]
fn later_overrides_win() {
    let cfg = load(&["experiment.budget=5", "experiment.budget=7"]).unwrap();
    assert_eq!(cfg.experiment.budget, 7);
}

#[test]
fn unknown_fields_are_config_errors() {
    assert!(matches!(load(&["experiment.budgte=5"]), Err(Error::Config(_))));
    assert!(matches!(Config::parse("[nonsense]\nx = 1\n"), Err(Error::Config(_))));
}

#[test]
fn invalid_values_are_config_errors() {
    assert!(matches!(load(&["experiment.agent=oracle"]), Err(Error::Config(_))));
    assert!(matches!(load(&["experiment.budget=0"]), Err(Error::Config(_))));
    assert!(matches!(load(&["experiment.preset=nope"]), Err(Error::Config(_))));
    assert!(matches!(load(&["experiment.labels=t.txt"]), Err(Error::Config(_))));
}

#[test]
fn malformed_assignments_are_rejected() {
    let mut t = toml::Table::new();
    assert!(apply_override(&mut t, "no_equals").is_err());
    assert!(apply_override(&mut t, "a..b=1").is_err());
    apply_override(&mut t, "a=1").unwrap();
    assert!(apply_override(&mut t, "a.b=1").is_err(), "a is not a table");
}

#[test]
fn resolved_toml_round_trips() {
    let cfg = load(&["train.epochs=3", "online.clip=0.3", "embedbench.step_caps.node2vec=40"]).unwrap();
    let again = Config::parse(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
    assert_eq!(again.hash(), cfg.hash());
}

#[test]
fn hash_tracks_every_field() {
    let base = load(&[]).unwrap();
    assert_eq!(base.hash(), load(&[]).unwrap().hash());
    assert_eq!(base.hash().len(), 64);
    assert_ne!(base.hash(), load(&["experiment.seed=2"]).unwrap().hash());
    assert_ne!(base.hash(), load(&["embed.alpha=0.7"]).unwrap().hash());
}
