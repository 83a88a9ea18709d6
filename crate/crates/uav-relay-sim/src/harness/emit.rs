use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Scenario;
use super::{MobilityRun, SchemeResult};
use crate::error::{Result, SimError};
use crate::rl::{EpisodeLog, GridSearchEntry};

/// Everything a run produced; optional parts are emitted only when present.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub schemes: Vec<SchemeResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<Vec<EpisodeLog>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mobility: Option<MobilityRun>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<GridSearchEntry>>,
    /// (user count, total secrecy) points from a user-count sweep.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secrecy_vs_users: Option<Vec<(usize, f64)>>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| SimError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn csv<T, R>(header: &str, rows: &[T], mut f: impl FnMut(&T) -> R) -> String
where
    R: IntoIterator<Item = String>,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&f(row).into_iter().collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Write `summary.json`, plot-ready `series_*.csv` files, and
/// `run_meta.json` into `out_dir` (created if missing). The timestamp lives
/// only in `run_meta.json`; everything else is byte-stable for a fixed
/// (config, seed).
pub fn emit_results(
    artifacts: &RunArtifacts,
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| SimError::Io {
        path: out_dir.display().to_string(),
        source: e,
    })?;
    let mut written = Vec::new();
    let put = |name: &str, contents: String, written: &mut Vec<PathBuf>| -> Result<()> {
        let path = out_dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
        Ok(())
    };

    let summary = serde_json::to_string_pretty(artifacts)
        .map_err(|e| SimError::Numerical(format!("summary serialization failed: {e}")))?;
    put("summary.json", summary + "\n", &mut written)?;

    if !artifacts.schemes.is_empty() {
        let body = csv("scheme,total_secrecy", &artifacts.schemes, |r| {
            [r.scheme.name().to_string(), format!("{}", r.total_secrecy)]
        });
        put("series_secrecy_vs_scheme.csv", body, &mut written)?;
    }
    if let Some(episodes) = &artifacts.episodes {
        let body = csv("episode,cumulative_reward", episodes, |l| {
            [l.episode.to_string(), format!("{}", l.cumulative_reward)]
        });
        put("series_reward_vs_episode.csv", body, &mut written)?;
        let body = csv("episode,loss_mse,loss_mae,epsilon", episodes, |l| {
            [
                l.episode.to_string(),
                format!("{}", l.loss_mse),
                format!("{}", l.loss_mae),
                format!("{}", l.epsilon),
            ]
        });
        put("series_loss_vs_episode.csv", body, &mut written)?;
    }
    if let Some(mobility) = &artifacts.mobility {
        let body = csv("center_x,total_secrecy", &mobility.steps, |s| {
            [format!("{}", s.center_x), format!("{}", s.total_secrecy)]
        });
        put("series_secrecy_vs_center.csv", body, &mut written)?;
    }
    if let Some(points) = &artifacts.secrecy_vs_users {
        let body = csv("users,total_secrecy", points, |(k, v)| {
            [k.to_string(), format!("{v}")]
        });
        put("series_secrecy_vs_users.csv", body, &mut written)?;
    }
    if let Some(grid) = &artifacts.grid {
        let body = csv("gamma,learning_rate,score", grid, |g| {
            [
                format!("{}", g.gamma),
                format!("{}", g.learning_rate),
                format!("{}", g.score),
            ]
        });
        put("series_grid_search.csv", body, &mut written)?;
    }

    let meta = serde_json::json!({
        "seed": scenario.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp_unix": std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        "defaults_note": "parameter defaults are this simulator's own desk-scale choices",
        "config": scenario,
    });
    put(
        "run_meta.json",
        serde_json::to_string_pretty(&meta).unwrap() + "\n",
        &mut written,
    )?;
    Ok(written)
}
