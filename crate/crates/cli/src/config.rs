//! Flat `key = value` run configuration.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConfigError {
    UnknownKey(String),
    BadValue { key: String, value: String, expected: &'static str },
    Missing(String),
    Invalid { key: String, msg: String },
    Syntax { line: usize, text: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::UnknownKey(k) => write!(f, "unknown key `{k}`"),
            ConfigError::BadValue { key, value, expected } => {
                write!(f, "key `{key}`: cannot read `{value}` as {expected}")
            }
            ConfigError::Missing(k) => write!(f, "missing required key `{k}`"),
            ConfigError::Invalid { key, msg } => write!(f, "key `{key}`: {msg}"),
            ConfigError::Syntax { line, text } => write!(f, "line {line}: expected `key = value`, got `{text}`"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subcommand {
    Percolate,
    Cell,
    Build,
    Verify,
    Evolve,
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ScheduleKey {
    Sweep,
    Worklist,
}

/// Values that can sit on the right of `key = value` and print back identically.
pub trait ConfigValue: Sized {
    const EXPECTED: &'static str;
    fn parse_value(text: &str) -> Option<Self>;
    fn render(&self) -> String;
}

macro_rules! numeric_value {
    ($($t:ty => $name:literal),*) => {$(
        impl ConfigValue for $t {
            const EXPECTED: &'static str = $name;
            fn parse_value(text: &str) -> Option<Self> {
                <$t>::from_str(text).ok()
            }
            fn render(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

numeric_value!(u64 => "an unsigned integer", usize => "an unsigned integer", u32 => "an unsigned integer");

impl ConfigValue for f64 {
    const EXPECTED: &'static str = "a finite number";
    fn parse_value(text: &str) -> Option<Self> {
        f64::from_str(text).ok().filter(|v| v.is_finite())
    }
    fn render(&self) -> String {
        // shortest representation that reads back to the same bits
        format!("{self:?}")
    }
}

impl ConfigValue for PathBuf {
    const EXPECTED: &'static str = "a path";
    fn parse_value(text: &str) -> Option<Self> {
        Some(PathBuf::from(text))
    }
    fn render(&self) -> String {
        self.display().to_string()
    }
}

macro_rules! enum_value {
    ($t:ty, $expected:literal, $($text:literal => $variant:expr),*) => {
        impl ConfigValue for $t {
            const EXPECTED: &'static str = $expected;
            fn parse_value(text: &str) -> Option<Self> {
                match text {
                    $($text => Some($variant),)*
                    _ => None,
                }
            }
            fn render(&self) -> String {
                match self {
                    $(v if *v == $variant => $text.to_string(),)*
                    _ => unreachable!(),
                }
            }
        }
    };
}

enum_value!(Subcommand, "one of percolate, cell, build, verify, evolve, scan",
    "percolate" => Subcommand::Percolate, "cell" => Subcommand::Cell, "build" => Subcommand::Build,
    "verify" => Subcommand::Verify, "evolve" => Subcommand::Evolve, "scan" => Subcommand::Scan);
enum_value!(Format, "csv or jsonl", "csv" => Format::Csv, "jsonl" => Format::Jsonl);
enum_value!(ScheduleKey, "sweep or worklist", "sweep" => ScheduleKey::Sweep, "worklist" => ScheduleKey::Worklist);

macro_rules! params {
    ($($key:ident : $t:ty = $default:expr, $doc:literal;)*) => {
        /// Every tunable scalar, with its default.
        #[derive(Debug, Clone, PartialEq, Serialize)]
        pub struct Params {
            $(#[doc = $doc] pub $key: $t,)*
        }

        impl Default for Params {
            fn default() -> Self {
                Params { $($key: $default,)* }
            }
        }

        impl Params {
            /// (key, description) in declaration order.
            pub const KEYS: &'static [(&'static str, &'static str)] = &[$((stringify!($key), $doc),)*];

            pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
                match key {
                    $(stringify!($key) => {
                        self.$key = <$t as ConfigValue>::parse_value(value).ok_or_else(|| ConfigError::BadValue {
                            key: key.to_string(),
                            value: value.to_string(),
                            expected: <$t as ConfigValue>::EXPECTED,
                        })?;
                    })*
                    _ => return Err(ConfigError::UnknownKey(key.to_string())),
                }
                Ok(())
            }

            pub fn entries(&self) -> Vec<(&'static str, String)> {
                vec![$((stringify!($key), self.$key.render()),)*]
            }
        }
    };
}

params! {
    seed: u64 = 0, "base seed; sample i uses seed + i (PINLAB_SEED overrides)";
    output_dir: PathBuf = PathBuf::from("pinlab-out"), "directory for results and the manifest";
    format: Format = Format::Csv, "record format: csv or jsonl";
    threads: usize = 0, "worker threads, 0 = all cores";
    s: f64 = 0.75, "fractional order, in [0.5, 1)";
    // percolate
    n: usize = 1, "lattice base dimension";
    width: usize = 200, "lattice width per base direction";
    height: usize = 64, "lattice height (rows, including the start row)";
    p: f64 = 0.97, "open-site probability (sweep start)";
    p_max: f64 = 0.97, "sweep end; ignored when p_steps = 1";
    p_steps: usize = 1, "number of p values in the sweep";
    samples: usize = 100, "lattices per p value";
    alpha: f64 = 0.5, "growth exponent of H(k) = floor(k^alpha)";
    schedule: ScheduleKey = ScheduleKey::Sweep, "fixed-point schedule: sweep or worklist";
    // cell
    a: f64 = 4.0, "cell half-period";
    b: f64 = 0.5, "cell plateau half-width";
    delta: f64 = 0.25, "cell mollification width";
    f2: f64 = 0.5, "plateau forcing F2";
    n_modes: usize = 0, "Fourier modes, 0 = automatic";
    grid_points: usize = 1024, "samples of the exported cell profile";
    // build / verify / evolve / scan
    r0: f64 = 1.0, "obstacle plateau half-width";
    r1: f64 = 1.5, "obstacle support radius";
    q: f64 = 1.0, "strength threshold of pinning obstacles";
    v: f64 = 1e-4, "cell area V";
    c_a: f64 = 6.0, "upper ratio a/l (C_a > 5)";
    c_delta: f64 = 0.5, "mollification ratio (0 < C_delta < 1)";
    a_ratio: f64 = 1.5, "chosen a/l, in [1.5, C_a]";
    strength_min: f64 = 1.0, "obstacle strengths are uniform on [strength_min, strength_max]";
    strength_max: f64 = 1.0, "equal to strength_min for a point law";
    n_boxes: usize = 16, "boxes around the torus";
    rows: usize = 64, "percolation rows of the certificate lattice";
    p_open: f64 = 0.97, "probability that a certificate cell holds a strong obstacle";
    log2_grid: u32 = 14, "log2 of the verification grid size";
    tol_factor: f64 = 1e-3, "residual tolerance in units of F*";
    field_file: PathBuf = PathBuf::new(), "obstacle field to verify; empty = sample from seed";
    force: f64 = -1.0, "driving force F; negative = F* of the parameters";
    dt: f64 = 0.1, "time step";
    t_max: f64 = 2000.0, "time horizon";
    pin_tol: f64 = 0.0, "velocity threshold; 0 = 1e-8 F";
    evolve_log2_grid: u32 = 10, "log2 of the simulation grid size";
    snapshot_every: usize = 100, "steps between trajectory snapshots, 0 = first and last only";
    f_lo: f64 = 0.0, "lower scan bracket";
    f_hi: f64 = -1.0, "upper scan bracket; negative = 10 sup f of each field";
    n_bisect: usize = 8, "bisection steps";
    realizations: usize = 4, "fields per scan";
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub params: Params,
}

impl RunConfig {
    /// Canonical `key = value` text; parsing it gives back the same config.
    pub fn render(&self) -> String {
        let mut out = format!("subcommand = {}\n", self.subcommand.render());
        for (k, v) in self.params.entries() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.render().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        let bad = |key: &str, msg: String| Err(ConfigError::Invalid { key: key.to_string(), msg });
        if !(p.s >= 0.5 && p.s < 1.0) {
            return bad("s", format!("{} is outside [0.5, 1)", p.s));
        }
        for (key, val) in [("p", p.p), ("p_max", p.p_max), ("p_open", p.p_open)] {
            if !(0.0..=1.0).contains(&val) {
                return bad(key, format!("{val} is not a probability"));
            }
        }
        if !(p.alpha > 0.0 && p.alpha < 1.0) {
            return bad("alpha", format!("{} is outside (0, 1)", p.alpha));
        }
        if p.samples == 0 || p.p_steps == 0 || p.realizations == 0 {
            return bad("samples", "samples, p_steps and realizations must be positive".into());
        }
        if p.n == 0 || p.width == 0 || p.height < 2 {
            return bad("height", "need n >= 1, width >= 1 and height >= 2".into());
        }
        if !(p.strength_min > 0.0 && p.strength_max >= p.strength_min) {
            return bad("strength_max", "need 0 < strength_min <= strength_max".into());
        }
        if !(4..=22).contains(&p.log2_grid) || !(4..=22).contains(&p.evolve_log2_grid) {
            return bad("log2_grid", "grid exponents must lie in 4..=22".into());
        }
        if !(p.dt > 0.0 && p.t_max > 0.0) {
            return bad("dt", "dt and t_max must be positive".into());
        }
        Ok(())
    }
}

/// Parses `key = value` lines with `#` comments. `subcommand` may come from the text or from
/// `fallback` (the command line wins); it is required from one of them.
pub fn parse_config(text: &str, fallback: Option<Subcommand>) -> Result<RunConfig, ConfigError> {
    let mut params = Params::default();
    let mut subcommand = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        if key == "subcommand" {
            subcommand = Some(Subcommand::parse_value(value).ok_or_else(|| ConfigError::BadValue {
                key: key.to_string(),
                value: value.to_string(),
                expected: Subcommand::EXPECTED,
            })?);
        } else {
            params.set(key, value)?;
        }
    }
    let subcommand = fallback.or(subcommand).ok_or_else(|| ConfigError::Missing("subcommand".into()))?;
    let cfg = RunConfig { subcommand, params };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("", Some(Subcommand::Cell)).unwrap();
        assert_eq!(c.params, Params::default());
    }

    #[test]
    fn comments_and_spacing() {
        let c = parse_config("# header\n  s=0.5   # trailing\n\nseed = 17\n", Some(Subcommand::Build)).unwrap();
        assert_eq!(c.params.s, 0.5);
        assert_eq!(c.params.seed, 17);
    }

    #[test]
    fn order_out_of_range_rejected() {
        let e = parse_config("s = 0.4", Some(Subcommand::Cell)).unwrap_err();
        assert!(matches!(e, ConfigError::Invalid { ref key, .. } if key == "s"));
    }

    #[test]
    fn unknown_and_mistyped_keys() {
        assert_eq!(parse_config("speed = 1", Some(Subcommand::Cell)), Err(ConfigError::UnknownKey("speed".into())));
        assert!(matches!(parse_config("seed = -3", Some(Subcommand::Cell)), Err(ConfigError::BadValue { .. })));
        assert!(matches!(parse_config("just words", Some(Subcommand::Cell)), Err(ConfigError::Syntax { line: 1, .. })));
        assert_eq!(parse_config("", None), Err(ConfigError::Missing("subcommand".into())));
    }

    #[test]
    fn render_round_trips() {
        let c = parse_config("s = 0.6\nv = 3.3e-5\nformat = jsonl\nfield_file = a b.txt", Some(Subcommand::Scan)).unwrap();
        let back = parse_config(&c.render(), None).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }
}
