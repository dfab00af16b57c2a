//! Run configuration: flat `section.key = value` lines with `#` comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use revtone::{ActionConfig, SpectralConfig};

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Density,
    Spectrum,
    Converge,
    VerifySphere,
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "validate" => Command::Validate,
            "density" => Command::Density,
            "spectrum" => Command::Spectrum,
            "converge" => Command::Converge,
            "verify-sphere" => Command::VerifySphere,
            _ => {
                return Err(format!(
                    "unknown command '{s}' (expected validate, density, spectrum, converge or verify-sphere)"
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    RoundSphere,
    Ellipsoid(f64),
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    RadialMult,
    AngularRatio,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SymbolSource {
    Expr { text: String, expr: Expr },
    Table(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSpec {
    pub kind: SymbolKind,
    pub source: SymbolSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormChoice {
    Solver,
    Legendre,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub out_dir: PathBuf,
    pub ells: Vec<usize>,
    pub profile: ProfileSpec,
    pub actions: ActionConfig,
    pub spectral: SpectralConfig,
    pub symbol: Option<SymbolSpec>,
    pub density_points: usize,
    pub norm_source: NormChoice,
    pub verify_max_ell: usize,
    pub verify_norm_max_ell: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            out_dir: PathBuf::from("out"),
            ells: Vec::new(),
            profile: ProfileSpec::RoundSphere,
            actions: ActionConfig::default(),
            spectral: SpectralConfig::default(),
            symbol: None,
            density_points: 2000,
            norm_source: NormChoice::Solver,
            verify_max_ell: 30,
            verify_norm_max_ell: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub source: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.source, self.message)
        } else {
            write!(
                f,
                "{}:{}:{}: {}",
                self.source, self.line, self.column, self.message
            )
        }
    }
}

impl std::error::Error for ConfigError {}

/// One `key = value` entry with the position of its value.
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    key_col: usize,
    value_col: usize,
}

const KEYS: &[&str] = &[
    "run.command",
    "run.out_dir",
    "run.ells",
    "profile.kind",
    "profile.aspect",
    "profile.table_path",
    "actions.quad_nodes",
    "actions.fd_step",
    "actions.newton_tol",
    "spectral.grid_size",
    "spectral.interp",
    "spectral.richardson",
    "symbol.kind",
    "symbol.expr",
    "symbol.table_path",
    "density.points",
    "converge.norm_source",
    "verify.max_ell",
    "verify.norm_max_ell",
];

struct Ctx<'a> {
    source: &'a str,
    base: &'a Path,
    entries: BTreeMap<&'static str, Entry>,
}

impl Ctx<'_> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> ConfigError {
        ConfigError {
            source: self.source.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn at(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let e = &self.entries[key];
        self.err(e.line, e.value_col, format!("{key}: {}", message.into()))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| self.at(key, format!("cannot parse '{}'", e.value))),
        }
    }

    fn ranged<T>(
        &self,
        key: &str,
        ok: impl Fn(T) -> bool,
        range: &str,
    ) -> Result<Option<T>, ConfigError>
    where
        T: FromStr + Copy + fmt::Display,
    {
        match self.get::<T>(key)? {
            Some(v) if !ok(v) => Err(self.at(key, format!("{v} is out of range ({range})"))),
            v => Ok(v),
        }
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.entries.get(key).map(|e| {
            let p = PathBuf::from(&e.value);
            if p.is_absolute() {
                p
            } else {
                self.base.join(p)
            }
        })
    }
}

impl RunConfig {
    /// Parses configuration text. Relative paths are resolved against
    /// `base`; `source` names the text in diagnostics.
    pub fn parse(text: &str, source: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut ctx = Ctx {
            source,
            base,
            entries: BTreeMap::new(),
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let Some((key, entry)) =
                split_line(raw, line).map_err(|(col, msg)| ctx.err(line, col, msg))?
            else {
                continue;
            };
            let Some(&known) = KEYS.iter().find(|k| **k == key) else {
                return Err(ctx.err(line, entry.key_col, format!("unknown key '{key}'")));
            };
            if let Some(prev) = ctx.entries.get(known) {
                return Err(ctx.err(
                    line,
                    entry.key_col,
                    format!("duplicate key '{key}' (first set on line {})", prev.line),
                ));
            }
            ctx.entries.insert(known, entry);
        }
        Self::from_entries(&ctx)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            source: path.display().to_string(),
            line: 0,
            column: 0,
            message: format!("cannot read config: {e}"),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    fn from_entries(ctx: &Ctx<'_>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(c) = ctx.entries.get("run.command") {
            cfg.command = Some(
                c.value
                    .parse()
                    .map_err(|m: String| ctx.at("run.command", m))?,
            );
        }
        if let Some(p) = ctx.path("run.out_dir") {
            cfg.out_dir = p;
        }
        if let Some(e) = ctx.entries.get("run.ells") {
            cfg.ells = parse_ells(&e.value).map_err(|m| ctx.at("run.ells", m))?;
        }

        let kind = ctx.entries.get("profile.kind").map(|e| e.value.as_str());
        cfg.profile = match kind.unwrap_or("round_sphere") {
            "round_sphere" => ProfileSpec::RoundSphere,
            "ellipsoid" => {
                let aspect = ctx
                    .ranged::<f64>("profile.aspect", |a| a > 0.0 && a <= 100.0, "0 < aspect <= 100")?
                    .ok_or_else(|| ctx.at("profile.kind", "ellipsoid needs profile.aspect"))?;
                ProfileSpec::Ellipsoid(aspect)
            }
            "custom_table" => ProfileSpec::Table(
                ctx.path("profile.table_path")
                    .ok_or_else(|| ctx.at("profile.kind", "custom_table needs profile.table_path"))?,
            ),
            other => {
                return Err(ctx.at(
                    "profile.kind",
                    format!("unknown profile kind '{other}' (expected round_sphere, ellipsoid or custom_table)"),
                ))
            }
        };
        if !matches!(cfg.profile, ProfileSpec::Ellipsoid(_))
            && ctx.entries.contains_key("profile.aspect")
        {
            return Err(ctx.at("profile.aspect", "only valid with profile.kind = ellipsoid"));
        }

        if let Some(v) = ctx.ranged::<usize>(
            "actions.quad_nodes",
            |n| (64..=1_000_000).contains(&n),
            "64..=1000000",
        )? {
            cfg.actions.quad_nodes = v;
        }
        if let Some(v) = ctx.ranged::<f64>(
            "actions.fd_step",
            |x| x > 0.0 && x < 0.1,
            "0 < fd_step < 0.1",
        )? {
            cfg.actions.fd_step = v;
        }
        if let Some(v) = ctx.ranged::<f64>(
            "actions.newton_tol",
            |x| (1e-15..=1e-3).contains(&x),
            "1e-15..=1e-3",
        )? {
            cfg.actions.newton_tol = v;
        }
        if let Some(v) = ctx.ranged::<usize>(
            "spectral.grid_size",
            |n| (16..=2_000_000).contains(&n),
            "16..=2000000",
        )? {
            cfg.spectral.grid_size = v;
        }
        if let Some(e) = ctx.entries.get("spectral.interp") {
            if e.value != "cubic" {
                return Err(ctx.at(
                    "spectral.interp",
                    format!("unsupported interpolation '{}' (expected cubic)", e.value),
                ));
            }
        }
        if let Some(v) = ctx.get::<bool>("spectral.richardson")? {
            cfg.spectral.richardson = v;
        }
        if let Some(v) = ctx.ranged::<usize>(
            "density.points",
            |n| (2..=10_000_000).contains(&n),
            "2..=10000000",
        )? {
            cfg.density_points = v;
        }
        if let Some(e) = ctx.entries.get("converge.norm_source") {
            cfg.norm_source = match e.value.as_str() {
                "solver" => NormChoice::Solver,
                "legendre" => NormChoice::Legendre,
                other => {
                    return Err(ctx.at(
                        "converge.norm_source",
                        format!("unknown source '{other}' (expected solver or legendre)"),
                    ))
                }
            };
        }
        if let Some(v) =
            ctx.ranged::<usize>("verify.max_ell", |n| (1..=200).contains(&n), "1..=200")?
        {
            cfg.verify_max_ell = v;
        }
        if let Some(v) =
            ctx.ranged::<usize>("verify.norm_max_ell", |n| (1..=200).contains(&n), "1..=200")?
        {
            cfg.verify_norm_max_ell = v;
        }
        cfg.symbol = Self::symbol(ctx)?;
        Ok(cfg)
    }

    fn symbol(ctx: &Ctx<'_>) -> Result<Option<SymbolSpec>, ConfigError> {
        let kind = match ctx.entries.get("symbol.kind").map(|e| e.value.as_str()) {
            None | Some("none") => {
                for key in ["symbol.expr", "symbol.table_path"] {
                    if ctx.entries.contains_key(key) {
                        return Err(ctx.at(key, "set symbol.kind to radial_mult or angular_ratio"));
                    }
                }
                return Ok(None);
            }
            Some("radial_mult") => SymbolKind::RadialMult,
            Some("angular_ratio") => SymbolKind::AngularRatio,
            Some(other) => return Err(ctx.at(
                "symbol.kind",
                format!(
                    "unknown symbol kind '{other}' (expected none, radial_mult or angular_ratio)"
                ),
            )),
        };
        let var = match kind {
            SymbolKind::RadialMult => 'r',
            SymbolKind::AngularRatio => 's',
        };
        let source = match (
            ctx.entries.get("symbol.expr"),
            ctx.path("symbol.table_path"),
        ) {
            (Some(_), Some(_)) => {
                return Err(ctx.at(
                    "symbol.table_path",
                    "give either symbol.expr or symbol.table_path",
                ))
            }
            (None, None) => {
                return Err(ctx.at(
                    "symbol.kind",
                    "symbol needs symbol.expr or symbol.table_path",
                ))
            }
            (None, Some(p)) => SymbolSource::Table(p),
            (Some(e), None) => {
                let expr = Expr::parse(&e.value, var).map_err(|pe| {
                    ctx.err(
                        e.line,
                        e.value_col + pe.column - 1,
                        format!("symbol.expr: {}", pe.message),
                    )
                })?;
                SymbolSource::Expr {
                    text: e.value.clone(),
                    expr,
                }
            }
        };
        Ok(Some(SymbolSpec { kind, source }))
    }
}

/// Splits one line into key and value. Blank and comment lines give `None`.
fn split_line(raw: &str, line: usize) -> Result<Option<(String, Entry)>, (usize, String)> {
    let chars: Vec<char> = raw.chars().collect();
    let col_of = |i: usize| i + 1;
    let first = chars.iter().position(|c| !c.is_whitespace());
    let Some(start) = first else { return Ok(None) };
    if chars[start] == '#' {
        return Ok(None);
    }
    let Some(eq) = chars.iter().position(|&c| c == '=') else {
        return Err((col_of(start), "expected 'section.key = value'".into()));
    };
    let key: String = chars[start..eq]
        .iter()
        .collect::<String>()
        .trim_end()
        .to_string();
    if key.is_empty() {
        return Err((col_of(start), "missing key before '='".into()));
    }
    if !key.contains('.')
        || key
            .chars()
            .any(|c| !(c.is_ascii_alphanumeric() || c == '_' || c == '.'))
    {
        return Err((
            col_of(start),
            format!("malformed key '{key}' (expected section.key)"),
        ));
    }
    let mut i = eq + 1;
    while i < chars.len() && chars[i].is_whitespace() {
        i += 1;
    }
    let value_col = col_of(i);
    let value = if i < chars.len() && chars[i] == '"' {
        let close = chars[i + 1..]
            .iter()
            .position(|&c| c == '"')
            .map(|p| p + i + 1)
            .ok_or((value_col, "unterminated string".to_string()))?;
        let rest: String = chars[close + 1..].iter().collect();
        let rest = rest.trim_start();
        if !(rest.is_empty() || rest.starts_with('#')) {
            return Err((
                col_of(close + 1),
                "unexpected text after quoted value".into(),
            ));
        }
        chars[i + 1..close].iter().collect::<String>()
    } else {
        let end = chars[i..]
            .iter()
            .position(|&c| c == '#')
            .map_or(chars.len(), |p| p + i);
        chars[i..end]
            .iter()
            .collect::<String>()
            .trim_end()
            .to_string()
    };
    if value.is_empty() {
        return Err((value_col, format!("missing value for '{key}'")));
    }
    Ok(Some((
        key,
        Entry {
            value,
            line,
            key_col: col_of(start),
            value_col: value_col + usize::from(i < chars.len() && chars[i] == '"'),
        },
    )))
}

fn parse_ells(text: &str) -> Result<Vec<usize>, String> {
    let ells = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<usize>()
                .ok()
                .filter(|&l| (1..=5000).contains(&l))
                .ok_or_else(|| format!("'{t}' is not an integer in 1..=5000"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if ells.windows(2).any(|w| w[0] >= w[1]) {
        return Err("values must be strictly ascending".into());
    }
    Ok(ells)
}
