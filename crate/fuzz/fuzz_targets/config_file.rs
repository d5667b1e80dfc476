#![no_main]

use libfuzzer_sys::fuzz_target;
use qlaser_cli::config::{Command, RunConfig, Settings};

fuzz_target!(|text: &str| {
    if let Ok(settings) = Settings::parse(text) {
        for command in [Command::ScanPump, Command::Table, Command::Profile, Command::Validate] {
            if let Ok(cfg) = RunConfig::resolve(command, &settings) {
                for &c in &cfg.c {
                    assert!(cfg.pump.values(c).len() <= qlaser_cli::config::MAX_SCAN_POINTS);
                }
            }
        }
    }
});
