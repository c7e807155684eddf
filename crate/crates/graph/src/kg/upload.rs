use std::time::{Duration, Instant};

use scikg_core::xmp::parse_xmp_with;
use scikg_core::pdf::extract_metadata_with;
use scikg_core::XmpOptions;
use serde::{Deserialize, Serialize};

use super::{map_to_paper_with, resolve_ids, GraphClient, KgError, Overrides, ResolvedRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UploadMode {
    Add,
    Update,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTiming {
    pub step: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadReport {
    pub mode: UploadMode,
    pub paper_id: String,
    /// Always `extract`, `resolve`, `upload`, in that order.
    pub step_timings: Vec<StepTiming>,
    pub total_seconds: f64,
}

impl UploadReport {
    pub fn seconds(&self, step: &str) -> Option<f64> {
        self.step_timings.iter().find(|t| t.step == step).map(|t| t.seconds)
    }
}

/// Monotonic durations of the steps that precede the upload.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepTimer {
    pub extract: Duration,
    pub resolve: Duration,
}

fn millis(d: Duration) -> f64 {
    d.as_millis() as f64 / 1000.0
}

fn report(mode: UploadMode, paper_id: String, timer: StepTimer, upload: Duration) -> UploadReport {
    let step_timings: Vec<StepTiming> = [("extract", timer.extract), ("resolve", timer.resolve), ("upload", upload)]
        .into_iter()
        .map(|(step, d)| StepTiming {
            step: step.to_string(),
            seconds: millis(d),
        })
        .collect();
    let total_seconds = step_timings.iter().map(|t| t.seconds).sum();
    UploadReport {
        mode,
        paper_id,
        step_timings,
        total_seconds,
    }
}

/// Add posts a new paper; Update finds the paper by case-insensitive exact
/// title and replaces it under the same id.
pub async fn upload(
    resolved: &ResolvedRecord,
    mode: UploadMode,
    client: &GraphClient,
    timer: StepTimer,
) -> Result<UploadReport, KgError> {
    let started = Instant::now();
    let paper = &resolved.paper;
    let paper_id = match mode {
        UploadMode::Add => client.create_paper(paper).await?,
        UploadMode::Update => {
            let title = paper.title.as_deref().ok_or(KgError::MissingTitle)?;
            let matches: Vec<String> = client
                .find_papers(title)
                .await?
                .into_iter()
                .filter(|p| p.title.as_deref().is_some_and(|t| t.to_lowercase() == title.to_lowercase()))
                .map(|p| p.id)
                .collect();
            match matches.as_slice() {
                [] => return Err(KgError::PaperNotFound { title: title.to_string() }),
                [id] => {
                    client.replace_paper(id, paper).await?;
                    id.clone()
                }
                _ => {
                    return Err(KgError::AmbiguousPaper {
                        title: title.to_string(),
                        ids: matches,
                    })
                }
            }
        }
    };
    Ok(report(mode, paper_id, timer, started.elapsed()))
}

/// The whole dataflow on an annotated PDF: extract, map, resolve, upload.
pub async fn ingest(
    pdf: &[u8],
    overrides: &Overrides,
    mode: UploadMode,
    client: &GraphClient,
    options: &XmpOptions,
) -> Result<(UploadReport, ResolvedRecord), KgError> {
    let mut timer = StepTimer::default();

    let started = Instant::now();
    let packet = extract_metadata_with(pdf, options)?.ok_or(KgError::NoMetadata)?;
    let doc = parse_xmp_with(&packet, options)?;
    timer.extract = started.elapsed();

    let record = map_to_paper_with(&doc, overrides, &options.toolkit_namespace)?;

    let started = Instant::now();
    let resolved = resolve_ids(&record, client).await?;
    timer.resolve = started.elapsed();

    let report = upload(&resolved, mode, client, timer).await?;
    Ok((report, resolved))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_is_the_sum_of_rounded_steps() {
        let timer = StepTimer {
            extract: Duration::from_micros(10_400),
            resolve: Duration::from_micros(1_234_567),
        };
        let r = report(UploadMode::Add, "R1".into(), timer, Duration::from_millis(20));
        let steps: Vec<&str> = r.step_timings.iter().map(|t| t.step.as_str()).collect();
        assert_eq!(steps, ["extract", "resolve", "upload"]);
        assert_eq!(r.seconds("extract"), Some(0.010));
        assert_eq!(r.seconds("resolve"), Some(1.234));
        assert!((r.total_seconds - (0.010 + 1.234 + 0.020)).abs() < 1e-6);
    }
}
