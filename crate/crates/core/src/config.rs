//! Run configuration: `[block]` headers followed by `key = value` lines.
//!
//! ```text
//! [params]
//! N = 3
//! a = 1.0
//! b = 1.0
//! s = 0.5
//! mu = 1.0
//!
//! [grid]
//! r_min = 1e-3
//! r_max = 40
//! M = 4000
//! spacing = uniform
//! tensor_n = 128
//! L = 4
//!
//! [solver]
//! max_iters = 5000
//! tol = 1e-8
//! path_nodes = 40
//! seed = 24301
//!
//! [output]
//! directory = out
//! digits = 12
//! ```
//!
//! Every key is optional; omitted keys take the values above. Unknown blocks
//! or keys are errors.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;

use crate::error::{Error, Result};
use crate::grids::Spacing;
use crate::output::DEFAULT_DIGITS;
use crate::problem::{validate_params, ProblemParams};
use crate::solve::SolverOpts;
use crate::verify::SuiteGrids;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub grid: SuiteGrids,
    pub solver: SolverOpts,
    pub out_dir: PathBuf,
    pub digits: usize,
}

const KEYS: [(&str, &[&str]); 4] = [
    ("params", &["N", "a", "b", "s", "mu"]),
    ("grid", &["r_min", "r_max", "M", "spacing", "tensor_n", "L"]),
    ("solver", &["max_iters", "tol", "path_nodes", "seed", "perturbation"]),
    ("output", &["directory", "digits"]),
];

/// Raw, unvalidated key/value pairs; a block/key may appear once.
#[derive(Debug, Default, Clone)]
struct Raw(Vec<(String, String, String)>);

impl Raw {
    fn get<T: FromStr>(&self, block: &str, key: &str, default: T) -> Result<T> {
        match self.0.iter().find(|(b, k, _)| b == block && k == key) {
            None => Ok(default),
            Some((_, _, v)) => v
                .parse()
                .map_err(|_| Error::Config(format!("[{block}] {key} = '{v}' is not a valid value"))),
        }
    }
}

fn parse_raw(text: &str) -> Result<Raw> {
    let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut raw = Raw::default();
    for (section, props) in ini.iter() {
        let Some(block) = section else {
            if let Some((k, _)) = props.iter().next() {
                return Err(Error::Config(format!("key '{k}' appears before any [block] header")));
            }
            continue;
        };
        let allowed = KEYS
            .iter()
            .find(|(b, _)| *b == block)
            .ok_or_else(|| Error::Config(format!("unknown block [{block}]")))?
            .1;
        for (k, v) in props.iter() {
            if !allowed.contains(&k) {
                return Err(Error::Config(format!("unknown key '{k}' in [{block}]")));
            }
            if raw.0.iter().any(|(b, key, _)| b == block && key == k) {
                return Err(Error::Config(format!("duplicate key '{k}' in [{block}]")));
            }
            raw.0.push((block.to_string(), k.to_string(), v.trim().to_string()));
        }
    }
    Ok(raw)
}

impl RunConfig {
    /// Parses and validates configuration text.
    pub fn from_text(text: &str) -> Result<Self> {
        let raw = parse_raw(text)?;
        let params = validate_params(
            raw.get("params", "N", 3usize)?,
            raw.get("params", "a", 1.0)?,
            raw.get("params", "b", 1.0)?,
            raw.get("params", "s", 0.5)?,
            raw.get("params", "mu", 1.0)?,
        )?;
        let d = SuiteGrids::default();
        let grid = SuiteGrids {
            r_min: raw.get("grid", "r_min", d.r_min)?,
            r_max: raw.get("grid", "r_max", d.r_max)?,
            nodes: raw.get("grid", "M", d.nodes)?,
            spacing: raw.get::<Spacing>("grid", "spacing", d.spacing)?,
            tensor_half_width: raw.get("grid", "L", d.tensor_half_width)?,
            tensor_nodes: raw.get("grid", "tensor_n", d.tensor_nodes)?,
        };
        let s = SolverOpts::default();
        let solver = SolverOpts {
            max_iters: raw.get("solver", "max_iters", s.max_iters)?,
            tol: raw.get("solver", "tol", s.tol)?,
            path_nodes: raw.get("solver", "path_nodes", s.path_nodes)?,
            seed: raw.get("solver", "seed", s.seed)?,
            perturbation: raw.get("solver", "perturbation", s.perturbation)?,
        };
        let cfg = RunConfig {
            params,
            grid,
            solver,
            out_dir: PathBuf::from(raw.get("output", "directory", "out".to_string())?),
            digits: raw.get("output", "digits", DEFAULT_DIGITS)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Checks the non-parameter blocks; parameters are checked on construction.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(g.r_min > 0.0 && g.r_max > g.r_min && g.r_max.is_finite()) {
            return Err(Error::Config(format!(
                "[grid] needs 0 < r_min < r_max, got r_min = {}, r_max = {}",
                g.r_min, g.r_max
            )));
        }
        if g.nodes < 8 {
            return Err(Error::Config(format!("[grid] M must be at least 8, got {}", g.nodes)));
        }
        if !g.tensor_nodes.is_multiple_of(2) || !(4..=128).contains(&g.tensor_nodes) {
            return Err(Error::Config(format!(
                "[grid] tensor_n must be even and in [4, 128], got {}",
                g.tensor_nodes
            )));
        }
        if !(g.tensor_half_width > 0.0 && g.tensor_half_width.is_finite()) {
            return Err(Error::Config(format!("[grid] L must be positive, got {}", g.tensor_half_width)));
        }
        let s = &self.solver;
        if s.max_iters == 0 {
            return Err(Error::Config("[solver] max_iters must be positive".into()));
        }
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(Error::Config(format!("[solver] tol must be positive, got {}", s.tol)));
        }
        if s.path_nodes < 4 {
            return Err(Error::Config(format!("[solver] path_nodes must be at least 4, got {}", s.path_nodes)));
        }
        if !(s.perturbation >= 0.0 && s.perturbation.is_finite()) {
            return Err(Error::Config(format!(
                "[solver] perturbation must be nonnegative, got {}",
                s.perturbation
            )));
        }
        if !(1..=17).contains(&self.digits) {
            return Err(Error::Config(format!("[output] digits must be in [1, 17], got {}", self.digits)));
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_text("").expect("defaults are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_documented_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.params.dim, 3);
        assert_eq!(c.params.p, 4.0);
        assert_eq!(c.grid, SuiteGrids::default());
        assert_eq!(c.solver, SolverOpts::default());
        assert_eq!(c.digits, 12);
        assert_eq!(c.out_dir, PathBuf::from("out"));
    }

    #[test]
    fn parses_blocks_and_comments() {
        let c = RunConfig::from_text(
            "# model\n[params]\nb = -1\ns = -0.5 ; inline\n\n[grid]\nM = 500\nspacing = graded\n[solver]\nseed = 7\n",
        )
        .unwrap();
        assert_eq!(c.params.b, -1.0);
        assert_eq!(c.grid.nodes, 500);
        assert_eq!(c.grid.spacing, Spacing::Graded);
        assert_eq!(c.solver.seed, 7);
    }

    #[test]
    fn explicit_defaults_with_inline_comments() {
        let text = "[params]\nN = 3\na = 1.0\nb = 1.0\ns = 0.5\nmu = 1.0\n\n[grid]\nr_min = 1e-3\nr_max = 40\nM = 4000\n\
                    spacing = uniform     # or graded\ntensor_n = 128\nL = 4\n\n[solver]\nmax_iters = 5000\ntol = 1e-8\n\
                    path_nodes = 40\nseed = 24301\nperturbation = 0.0\n\n[output]\ndirectory = out\ndigits = 12\n";
        assert_eq!(RunConfig::from_text(text).unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_unknown_keys_and_blocks() {
        assert!(matches!(RunConfig::from_text("[params]\nnu = 1\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("[extra]\nx = 1\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("x = 1\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("[grid]\nM = 10\nM = 20\n"), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(RunConfig::from_text("[grid]\nM = many\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("[grid]\ntensor_n = 7\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::from_text("[params]\nb = 0\n"), Err(Error::Param(_))));
    }
}
