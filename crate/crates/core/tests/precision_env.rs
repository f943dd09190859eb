//! Alone in its own binary: it mutates the process environment.

use resonance::cli::{RunConfig, PRECISION_ENV};

#[test]
fn precision_comes_from_the_environment_when_unset() {
    let config = RunConfig {
        precision_digits: None,
        ..RunConfig::preset("barrier-sweep").unwrap()
    };
    std::env::set_var(PRECISION_ENV, "80");
    let from_env = config.precision().unwrap().digits();
    std::env::set_var(PRECISION_ENV, "abc");
    let bad = config.precision();
    std::env::remove_var(PRECISION_ENV);
    assert_eq!(from_env, 80);
    assert!(bad.is_err());
    let pinned = RunConfig {
        precision_digits: Some(40),
        ..config
    };
    assert_eq!(pinned.precision().unwrap().digits(), 40);
}
