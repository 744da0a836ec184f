use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelParams, FadingSpec, InterferenceSpec};
use crate::error::{param, Result};
use crate::rates::LogBase;

/// Raw `key = value` settings. Keys match the command-line flag names
/// without the leading dashes.
pub type ConfigMap = BTreeMap<String, String>;

pub const KNOWN_KEYS: &[&str] = &[
    "px-db",
    "pz-db",
    "sigma2",
    "block-len",
    "packet-len",
    "trials",
    "seed",
    "zmod",
    "fading",
    "delta-var",
    "out",
    "log-base",
    "schemes",
    "sweep-from",
    "sweep-to",
    "sweep-step",
    "block-lens",
    "suites",
];

pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 1;

/// Parses a flat `key = value` file. Blank lines and `#` comments are
/// skipped; repeated keys keep the last value.
pub fn parse_config_text(text: &str) -> Result<ConfigMap> {
    let mut map = ConfigMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| param(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(param(format!("config line {}: unknown key {key:?}", lineno + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Fig3,
    Fig4,
    Simulate,
    Rates,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::Simulate => "simulate",
            Command::Rates => "rates",
            Command::Validate => "validate",
        }
    }
}

/// A column that can be requested in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Naive,
    CU,
    RT,
    RBkic,
    ROrth,
    Gap,
    /// Empirical SINR of least-squares cancellation, in dB.
    McTraditionalSinr,
    /// Empirical SNR of `y''` against `V₁·x'`, in dB.
    McBkicResidual,
    /// Packet average of the per-realization orthogonal-training rate.
    McOrthRate,
}

impl Scheme {
    pub const ALL: [Scheme; 9] = [
        Scheme::Naive,
        Scheme::CU,
        Scheme::RT,
        Scheme::RBkic,
        Scheme::ROrth,
        Scheme::Gap,
        Scheme::McTraditionalSinr,
        Scheme::McBkicResidual,
        Scheme::McOrthRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Naive => "naive",
            Scheme::CU => "c_u",
            Scheme::RT => "r_t",
            Scheme::RBkic => "r_bkic",
            Scheme::ROrth => "r_orth",
            Scheme::Gap => "gap",
            Scheme::McTraditionalSinr => "mc_traditional_sinr",
            Scheme::McBkicResidual => "mc_bkic_residual",
            Scheme::McOrthRate => "mc_orth_rate",
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Scheme::McTraditionalSinr | Scheme::McBkicResidual | Scheme::McOrthRate)
    }
}

impl FromStr for Scheme {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| param(format!("unknown scheme {s:?}")))
    }
}

/// Distribution of the interference symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMod {
    Psk4,
    Psk8,
    Gauss,
    Qam16,
}

impl ZMod {
    pub fn spec(self) -> InterferenceSpec {
        match self {
            ZMod::Psk4 => InterferenceSpec::Psk(4),
            ZMod::Psk8 => InterferenceSpec::Psk(8),
            ZMod::Gauss => InterferenceSpec::Gaussian,
            ZMod::Qam16 => InterferenceSpec::Qam(16),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ZMod::Psk4 => "psk4",
            ZMod::Psk8 => "psk8",
            ZMod::Gauss => "gauss",
            ZMod::Qam16 => "qam16",
        }
    }
}

impl FromStr for ZMod {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        [ZMod::Psk4, ZMod::Psk8, ZMod::Gauss, ZMod::Qam16]
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| param(format!("zmod must be one of psk4, psk8, gauss, qam16; got {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FadingKind {
    Block,
    Continuous,
}

impl FromStr for FadingKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(FadingKind::Block),
            "continuous" => Ok(FadingKind::Continuous),
            _ => Err(param(format!("fading must be block or continuous, got {s:?}"))),
        }
    }
}

impl fmt::Display for FadingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FadingKind::Block => "block",
            FadingKind::Continuous => "continuous",
        })
    }
}

/// What varies across rows.
#[derive(Debug, Clone, PartialEq)]
pub enum Sweep {
    /// Target power in dB.
    PxDb(Vec<f64>),
    BlockLen(Vec<usize>),
    Single,
}

impl Sweep {
    pub fn len(&self) -> usize {
        match self {
            Sweep::PxDb(v) => v.len(),
            Sweep::BlockLen(v) => v.len(),
            Sweep::Single => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Validation suites run by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    HInvariance,
    ZfEquivalence,
    SinrMatch,
    Jensen,
    MimoIdentity,
    ContinuousFadingCov,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::HInvariance,
        Suite::ZfEquivalence,
        Suite::SinrMatch,
        Suite::Jensen,
        Suite::MimoIdentity,
        Suite::ContinuousFadingCov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::HInvariance => "h_invariance",
            Suite::ZfEquivalence => "zf_equivalence",
            Suite::SinrMatch => "sinr_match",
            Suite::Jensen => "jensen",
            Suite::MimoIdentity => "mimo_identity",
            Suite::ContinuousFadingCov => "continuous_fading_cov",
        }
    }
}

impl FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| param(format!("unknown validation suite {s:?}")))
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub sweep: Sweep,
    pub px_db: f64,
    /// `None` ties the interference power to the target power.
    pub pz_db: Option<f64>,
    pub sigma2: f64,
    pub block_len: usize,
    /// `None` means one block per packet.
    pub packet_len: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub zmod: ZMod,
    pub fading: FadingKind,
    pub delta_var: f64,
    pub out: Option<String>,
    pub log_base: LogBase,
    pub schemes: Vec<Scheme>,
    pub suites: Vec<Suite>,
}

fn get<T: FromStr>(map: &ConfigMap, key: &str) -> Result<Option<T>>
where
    T::Err: fmt::Display,
{
    map.get(key).map(|v| v.parse::<T>().map_err(|e| param(format!("{key}: cannot parse {v:?}: {e}")))).transpose()
}

fn list<T: FromStr>(map: &ConfigMap, key: &str) -> Result<Option<Vec<T>>>
where
    T::Err: fmt::Display,
{
    map.get(key)
        .map(|v| {
            v.split(',')
                .map(|s| s.trim().parse::<T>().map_err(|e| param(format!("{key}: cannot parse {s:?}: {e}"))))
                .collect()
        })
        .transpose()
}

fn px_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(param(format!("empty or invalid sweep {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| from + i as f64 * step).collect())
}

impl ExperimentConfig {
    /// Command defaults overlaid with `map`.
    pub fn resolve(command: Command, map: &ConfigMap) -> Result<Self> {
        if let Some(key) = map.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(param(format!("unknown key {key:?}")));
        }
        let forbid = |keys: &[&str]| -> Result<()> {
            match keys.iter().find(|k| map.contains_key(**k)) {
                Some(k) => Err(param(format!("--{k} does not apply to {}", command.name()))),
                None => Ok(()),
            }
        };
        match command {
            Command::Fig3 => forbid(&["block-lens", "suites"])?,
            Command::Fig4 => forbid(&["sweep-from", "sweep-to", "sweep-step", "suites"])?,
            Command::Simulate | Command::Rates => {
                forbid(&["sweep-from", "sweep-to", "sweep-step", "block-lens", "suites"])?
            }
            Command::Validate => forbid(&["sweep-from", "sweep-to", "sweep-step", "block-lens", "schemes"])?,
        }
        if command == Command::Fig3 && map.contains_key("px-db") {
            return Err(param("--px-db is the swept variable of fig3; use --sweep-from/--sweep-to"));
        }
        if command == Command::Fig4 && map.contains_key("block-len") {
            return Err(param("--block-len is the swept variable of fig4; use --block-lens"));
        }

        let sweep = match command {
            Command::Fig3 => Sweep::PxDb(px_grid(
                get(map, "sweep-from")?.unwrap_or(1.0),
                get(map, "sweep-to")?.unwrap_or(30.0),
                get(map, "sweep-step")?.unwrap_or(1.0),
            )?),
            Command::Fig4 => {
                let lens = list(map, "block-lens")?.unwrap_or_else(|| vec![10, 20, 50, 100, 200, 500, 1000]);
                if lens.is_empty() {
                    return Err(param("empty block-length sweep"));
                }
                Sweep::BlockLen(lens)
            }
            _ => Sweep::Single,
        };

        let default_schemes = match command {
            Command::Fig3 | Command::Fig4 => vec![Scheme::RT, Scheme::RBkic, Scheme::CU],
            Command::Simulate => Scheme::ALL.to_vec(),
            Command::Rates => vec![Scheme::Naive, Scheme::CU, Scheme::RT, Scheme::RBkic, Scheme::ROrth, Scheme::Gap],
            Command::Validate => Vec::new(),
        };
        let schemes: Vec<Scheme> = list(map, "schemes")?.unwrap_or(default_schemes);
        if command == Command::Rates {
            if let Some(s) = schemes.iter().find(|s| s.is_monte_carlo()) {
                return Err(param(format!("{} is a Monte Carlo scheme; use simulate", s.name())));
            }
        }
        if command != Command::Validate && schemes.is_empty() {
            return Err(param("no schemes requested"));
        }

        let fading = get(map, "fading")?.unwrap_or(FadingKind::Block);
        let delta_var: Option<f64> = get(map, "delta-var")?;
        if fading == FadingKind::Block && delta_var.is_some() {
            return Err(param("--delta-var requires --fading continuous"));
        }
        let delta_var = delta_var.unwrap_or(if fading == FadingKind::Continuous { 1e-3 } else { 0.0 });
        if !(delta_var >= 0.0 && delta_var.is_finite()) {
            return Err(param(format!("delta-var must be finite and >= 0, got {delta_var}")));
        }

        let trials = get(map, "trials")?.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            return Err(param("trials must be >= 1"));
        }

        let cfg = Self {
            command,
            sweep,
            px_db: get(map, "px-db")?.unwrap_or(20.0),
            pz_db: get(map, "pz-db")?,
            sigma2: get(map, "sigma2")?.unwrap_or(1.0),
            block_len: get(map, "block-len")?.unwrap_or(100),
            packet_len: get(map, "packet-len")?,
            trials,
            seed: get(map, "seed")?.unwrap_or(DEFAULT_SEED),
            zmod: get(map, "zmod")?.unwrap_or(ZMod::Psk4),
            fading,
            delta_var,
            out: map.get("out").cloned(),
            log_base: get(map, "log-base")?.unwrap_or_default(),
            schemes,
            suites: list(map, "suites")?.unwrap_or_else(|| Suite::ALL.to_vec()),
        };
        if cfg.command == Command::Validate && cfg.suites.is_empty() {
            return Err(param("no validation suites requested"));
        }
        for i in 0..cfg.sweep.len() {
            cfg.params_at(i)?;
        }
        Ok(cfg)
    }

    /// Channel parameters at sweep point `index`.
    pub fn params_at(&self, index: usize) -> Result<ChannelParams> {
        let (px_db, block_len) = match &self.sweep {
            Sweep::PxDb(v) => (v[index], self.block_len),
            Sweep::BlockLen(v) => (self.px_db, v[index]),
            Sweep::Single => (self.px_db, self.block_len),
        };
        let pz_db = self.pz_db.unwrap_or(px_db);
        ChannelParams::from_db(px_db, pz_db, self.sigma2, block_len, self.packet_len.unwrap_or(block_len))
    }

    pub fn fading_spec(&self) -> FadingSpec {
        match self.fading {
            FadingKind::Block => FadingSpec::Block,
            FadingKind::Continuous => FadingSpec::Continuous { delta_var: self.delta_var },
        }
    }

    /// `#`-prefixed lines recording every resolved setting.
    pub fn comment_lines(&self) -> Vec<String> {
        let join = |v: Vec<String>| v.join(",");
        let sweep = match &self.sweep {
            Sweep::PxDb(v) => format!("px-db in {}", join(v.iter().map(|x| x.to_string()).collect())),
            Sweep::BlockLen(v) => format!("block-len in {}", join(v.iter().map(|x| x.to_string()).collect())),
            Sweep::Single => "none".to_string(),
        };
        let mut lines = vec![
            format!("# command = {}", self.command.name()),
            format!("# sweep = {sweep}"),
            format!("# px-db = {}", self.px_db),
            format!("# pz-db = {}", self.pz_db.map_or("px-db".to_string(), |v| v.to_string())),
            format!("# sigma2 = {}", self.sigma2),
            format!("# block-len = {}", self.block_len),
            format!("# packet-len = {}", self.packet_len.map_or("block-len".to_string(), |v| v.to_string())),
            format!("# trials = {}", self.trials),
            format!("# seed = {}", self.seed),
            format!("# zmod = {}", self.zmod.name()),
            format!("# fading = {}", self.fading),
            format!("# delta-var = {}", self.delta_var),
            format!("# log-base = {} ({})", self.log_base, self.log_base.unit()),
        ];
        if self.command == Command::Validate {
            lines.push(format!("# suites = {}", join(self.suites.iter().map(|s| s.name().to_string()).collect())));
        } else {
            lines.push(format!("# schemes = {}", join(self.schemes.iter().map(|s| s.name().to_string()).collect())));
        }
        lines
    }
}
