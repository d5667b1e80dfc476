use clap::Parser;
use proptest::prelude::*;
use qlaser_cli::args::Cli;
use qlaser_cli::config::{expand_range, parse_range, Command, Key, RunConfig, Settings, MAX_SCAN_POINTS};

fn key_name() -> impl Strategy<Value = String> {
    prop::sample::select(Key::ALL.to_vec()).prop_map(|k| k.name().to_string())
}

fn value() -> impl Strategy<Value = String> {
    prop_oneof![
        "[0-9]{1,3}(\\.[0-9]{1,3})?",
        "[0-9]{1,2}:[0-9]{1,2}",
        "(csv|json|true|false|b[0-5][0-3])",
        "[ -~]{0,12}",
    ]
}

proptest! {
    #[test]
    fn config_text_never_panics(text in "[ -~\n]{0,200}") {
        if let Ok(s) = Settings::parse(&text) {
            for cmd in [Command::ScanPump, Command::Table, Command::Profile, Command::Validate] {
                let _ = RunConfig::resolve(cmd, &s);
            }
        }
    }

    #[test]
    fn well_formed_lines_round_trip(pairs in prop::collection::btree_map(key_name(), "[a-z0-9.:]{1,8}", 0..8)) {
        let text: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        let s = Settings::parse(&text).unwrap();
        for (k, v) in &pairs {
            prop_assert_eq!(s.get(Key::from_name(k).unwrap()), Some(v.as_str()));
        }
    }

    #[test]
    fn ranges_are_sorted_and_bounded(text in "[0-9e.:-]{0,16}", step in prop::num::f64::ANY) {
        if let Ok((a, b)) = parse_range(&text) {
            if let Ok(v) = expand_range(a, b, step) {
                prop_assert!(!v.is_empty() && v.len() <= MAX_SCAN_POINTS);
                prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(v[0] == a && *v.last().unwrap() <= b * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn argv_never_panics(
        sub in prop::sample::select(vec!["scan-pump", "table", "profile", "validate", "bogus"]),
        flags in prop::collection::vec((key_name(), value()), 0..6),
    ) {
        let mut argv = vec!["qlaser".to_string(), sub.to_string()];
        for (k, v) in flags {
            argv.push(format!("--{k}"));
            argv.push(v);
        }
        if let Ok(cli) = Cli::try_parse_from(&argv) {
            if let Ok(cfg) = cli.resolve() {
                for &c in &cfg.c {
                    prop_assert!(cfg.pump.values(c).len() <= MAX_SCAN_POINTS);
                }
            }
        }
    }
}
