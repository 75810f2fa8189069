//! Experiment configuration: a flat `key = value` file, overridden by CLI
//! flags with the same names.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("inconsistent configuration: {0}")]
    Inconsistent(String),
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
        pub enum $name { $($variant),+ }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok(Self::$variant),)+
                    _ => Err(format!("expected one of: {}", [$($text),+].join(", "))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $text),+ })
            }
        }
    };
}

keyword_enum!(ProblemKind { Poisson => "poisson", CpSynthetic => "cp-synthetic", TuckerSynthetic => "tucker-synthetic", TensorFile => "tensor-file" });
keyword_enum!(MethodKind { Als => "als", Hooi => "hooi", Cg => "cg", Pcg => "pcg", Richardson => "richardson", Ncg => "ncg", Lbfgs => "lbfgs", Lbroyden => "lbroyden" });
keyword_enum!(PrecondKind { None => "none", Lp => "lp", Tp => "tp" });
keyword_enum!(SweepKind { F => "f", Fb => "fb" });
keyword_enum!(LineSearchKind { Wolfe => "wolfe", ModBt => "modbt", ExactQuadratic => "exact-quadratic" });
keyword_enum!(BetaKind { Pr => "pr", Hs => "hs", Hz => "hz" });
keyword_enum!(ModelKind { Cp => "cp", Tucker => "tucker" });
keyword_enum!(FileFormat { Dtns => "dtns", Csv => "csv", Idx => "idx" });
keyword_enum!(GuardKind { Damp => "damp", Skip => "skip", Off => "off" });
keyword_enum!(EtaKind { One => "one", Match => "match" });
keyword_enum!(TransportKind { Parallel => "parallel", Projection => "projection" });

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub method: MethodKind,
    pub precond: PrecondKind,
    pub sweep: SweepKind,
    pub m: usize,
    /// Defaults by method: exact steps on Poisson, modBT for QN, Wolfe for NCG.
    pub linesearch: Option<LineSearchKind>,
    pub beta: BetaKind,
    /// `None` derives tilde/hat from `precond`.
    pub beta_hat: Option<bool>,
    /// NCG restart period; defaults to 20 for CP and 50 for Tucker.
    pub restart: Option<usize>,
    pub guard: Option<GuardKind>,
    pub eta: Option<EtaKind>,
    pub transport: TransportKind,
    pub window_transport: bool,
    pub max_iters: usize,
    pub max_fevals: usize,
    /// Defaults to 1e-10 for Poisson and 1e-7 otherwise.
    pub tol: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub label: Option<String>,

    // Poisson
    pub intervals: usize,
    pub omega: f64,

    // synthetic CP
    pub extent: usize,
    pub order: usize,
    pub rank: usize,
    pub collinearity: f64,
    pub l1: f64,
    pub l2: f64,

    // synthetic Tucker
    pub extents: Vec<usize>,
    pub true_ranks: Vec<usize>,
    pub ranks: Vec<usize>,

    // tensor file
    pub path: Option<PathBuf>,
    pub format: FileFormat,
    pub model: ModelKind,
    pub uniform_noise: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::CpSynthetic,
            method: MethodKind::Lbfgs,
            precond: PrecondKind::Lp,
            sweep: SweepKind::F,
            m: 1,
            linesearch: None,
            beta: BetaKind::Hs,
            beta_hat: None,
            restart: None,
            guard: None,
            eta: None,
            transport: TransportKind::Parallel,
            window_transport: false,
            max_iters: 1000,
            max_fevals: 10_000,
            tol: None,
            trials: 10,
            seed: 42,
            out_dir: PathBuf::from("results"),
            label: None,
            intervals: 50,
            omega: 1.0,
            extent: 50,
            order: 3,
            rank: 5,
            collinearity: 0.9,
            l1: 10.0,
            l2: 1.0,
            extents: vec![60, 60, 60],
            true_ranks: vec![20, 20, 20],
            ranks: vec![10, 10, 10],
            path: None,
            format: FileFormat::Dtns,
            model: ModelKind::Cp,
            uniform_noise: 0.0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e: T::Err| ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: e.to_string() })
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, ConfigError> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::InvalidValue { key: key.into(), value: value.into(), reason: "expected a boolean".into() }),
    }
}

impl ExperimentConfig {
    /// Sets one key. Keys use the CLI spelling (`max-iters`); underscores
    /// are accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        let norm = key.trim().replace('_', "-");
        match norm.as_str() {
            "problem" => self.problem = parse(key, value)?,
            "method" => self.method = parse(key, value)?,
            "precond" => self.precond = parse(key, value)?,
            "sweep" => self.sweep = parse(key, value)?,
            "m" => self.m = parse(key, value)?,
            "linesearch" => self.linesearch = Some(parse(key, value)?),
            "beta" => {
                let (rule, suffix) = value.split_once('-').map_or((value, None), |(r, s)| (r, Some(s)));
                self.beta = parse(key, rule)?;
                self.beta_hat = match suffix {
                    None => None,
                    Some("tilde") => Some(false),
                    Some("hat") => Some(true),
                    Some(_) => {
                        return Err(ConfigError::InvalidValue {
                            key: key.into(),
                            value: value.into(),
                            reason: "suffix must be `tilde` or `hat`".into(),
                        })
                    }
                };
            }
            "restart" => self.restart = Some(parse(key, value)?),
            "guard" => self.guard = Some(parse(key, value)?),
            "eta" => self.eta = Some(parse(key, value)?),
            "transport" => self.transport = parse(key, value)?,
            "window-transport" => self.window_transport = parse_bool(key, value)?,
            "max-iters" => self.max_iters = parse(key, value)?,
            "max-fevals" => self.max_fevals = parse(key, value)?,
            "tol" => self.tol = Some(parse(key, value)?),
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out-dir" => self.out_dir = PathBuf::from(value),
            "label" => self.label = Some(value.to_string()),
            "intervals" => self.intervals = parse(key, value)?,
            "omega" => self.omega = parse(key, value)?,
            "extent" => self.extent = parse(key, value)?,
            "order" => self.order = parse(key, value)?,
            "rank" => self.rank = parse(key, value)?,
            "collinearity" => self.collinearity = parse(key, value)?,
            "l1" => self.l1 = parse(key, value)?,
            "l2" => self.l2 = parse(key, value)?,
            "extents" => self.extents = parse_list(key, value)?,
            "true-ranks" => self.true_ranks = parse_list(key, value)?,
            "ranks" => self.ranks = parse_list(key, value)?,
            "path" => self.path = Some(PathBuf::from(value)),
            "format" => self.format = parse(key, value)?,
            "model" => self.model = parse(key, value)?,
            "uniform-noise" => self.uniform_noise = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut c = Self::default();
        c.apply_text(text)?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_text(&text)
    }

    /// Renders every key, suitable for [`ExperimentConfig::from_text`].
    pub fn to_text(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut lines = vec![
            format!("problem = {}", self.problem),
            format!("method = {}", self.method),
            format!("precond = {}", self.precond),
            format!("sweep = {}", self.sweep),
            format!("m = {}", self.m),
            format!("linesearch = {}", self.line_search()),
            format!("beta = {}-{}", self.beta, if self.beta_is_hat() { "hat" } else { "tilde" }),
            format!("restart = {}", self.restart_period()),
            format!("transport = {}", self.transport),
            format!("window-transport = {}", self.window_transport),
            format!("max-iters = {}", self.max_iters),
            format!("max-fevals = {}", self.max_fevals),
            format!("tol = {:e}", self.tolerance()),
            format!("trials = {}", self.trials),
            format!("seed = {}", self.seed),
            format!("out-dir = {}", self.out_dir.display()),
            format!("label = {}", self.run_label()),
            format!("intervals = {}", self.intervals),
            format!("omega = {}", self.omega),
            format!("extent = {}", self.extent),
            format!("order = {}", self.order),
            format!("rank = {}", self.rank),
            format!("collinearity = {}", self.collinearity),
            format!("l1 = {}", self.l1),
            format!("l2 = {}", self.l2),
            format!("extents = {}", list(&self.extents)),
            format!("true-ranks = {}", list(&self.true_ranks)),
            format!("ranks = {}", list(&self.ranks)),
            format!("format = {}", self.format),
            format!("model = {}", self.model),
            format!("uniform-noise = {}", self.uniform_noise),
        ];
        if let Some(g) = self.guard {
            lines.push(format!("guard = {g}"));
        }
        if let Some(e) = self.eta {
            lines.push(format!("eta = {e}"));
        }
        if let Some(p) = &self.path {
            lines.push(format!("path = {}", p.display()));
        }
        lines.join("\n") + "\n"
    }

    /// The decomposition model, if the problem is a tensor problem.
    pub fn tensor_model(&self) -> Option<ModelKind> {
        match self.problem {
            ProblemKind::Poisson => None,
            ProblemKind::CpSynthetic => Some(ModelKind::Cp),
            ProblemKind::TuckerSynthetic => Some(ModelKind::Tucker),
            ProblemKind::TensorFile => Some(self.model),
        }
    }

    pub fn line_search(&self) -> LineSearchKind {
        self.linesearch.unwrap_or(match (self.problem, self.method) {
            (ProblemKind::Poisson, _) => LineSearchKind::ExactQuadratic,
            (_, MethodKind::Ncg) => LineSearchKind::Wolfe,
            _ => LineSearchKind::ModBt,
        })
    }

    pub fn beta_is_hat(&self) -> bool {
        self.beta_hat.unwrap_or(self.precond == PrecondKind::Tp)
    }

    pub fn restart_period(&self) -> usize {
        self.restart.unwrap_or(match self.tensor_model() {
            Some(ModelKind::Tucker) => 50,
            Some(ModelKind::Cp) => 20,
            None => 0,
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(if self.problem == ProblemKind::Poisson { 1e-10 } else { 1e-7 })
    }

    pub fn run_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            let mut s = format!("{}-{}", self.problem, self.method);
            if matches!(self.method, MethodKind::Ncg | MethodKind::Lbfgs | MethodKind::Lbroyden) {
                s += &format!("-{}-{}-m{}-{}", self.precond, self.sweep, self.m, self.line_search());
            }
            s
        })
    }

    /// Checks cross-field constraints.
    pub fn validate(&self) -> Result<(), ConfigError> {
        use MethodKind::*;
        let bad = |msg: String| Err(ConfigError::Inconsistent(msg));
        let model = self.tensor_model();
        match (self.method, model) {
            (Als, Some(ModelKind::Cp)) | (Hooi, Some(ModelKind::Tucker)) => {}
            (Als | Hooi, _) => return bad(format!("method {} does not apply to problem {}", self.method, self.problem)),
            (Cg | Pcg | Richardson, None) => {}
            (Cg | Pcg | Richardson, Some(_)) => return bad(format!("method {} needs the poisson problem", self.method)),
            _ => {}
        }
        if matches!(self.method, Als | Hooi | Cg | Pcg | Richardson) && self.precond != PrecondKind::None {
            return bad(format!("method {} takes no outer preconditioner; use precond = none", self.method));
        }
        if self.line_search() == LineSearchKind::ExactQuadratic && model.is_some() {
            return bad("exact-quadratic line search needs a quadratic problem".into());
        }
        if self.method == Ncg && self.precond != PrecondKind::None {
            if let Some(hat) = self.beta_hat {
                if hat != (self.precond == PrecondKind::Tp) {
                    return bad("beta tilde goes with precond lp and beta hat with precond tp".into());
                }
            }
        }
        if matches!(self.method, Lbfgs | Lbroyden) && self.m == 0 {
            return bad("window m must be at least 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.tolerance() >= 0.0) {
            return bad("tol must be nonnegative".into());
        }
        match self.problem {
            ProblemKind::TuckerSynthetic if self.extents.len() != self.true_ranks.len() || self.extents.len() != self.ranks.len() => {
                return bad("extents, true-ranks and ranks need the same length".into())
            }
            ProblemKind::TensorFile if self.path.is_none() => return bad("tensor-file needs path".into()),
            _ => {}
        }
        Ok(())
    }
}
