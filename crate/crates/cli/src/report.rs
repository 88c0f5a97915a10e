//! Report shapes, redaction, and the JSON/table renderers.
//!
//! Reports carry no timestamps and no host details: two runs over the same
//! inputs must serialize to identical bytes.

use serde::{Deserialize, Serialize};

use secretsift_core::classify::Verdict;
use secretsift_core::metrics::{format_score, ConfusionMatrix, MetricsReport};
use secretsift_core::prompt::Label;
use secretsift_core::scanner::Candidate;
use secretsift_core::TaxonomyClass;

/// Masks a matched secret. Short strings are fully starred; longer ones
/// keep just enough of each end to be recognizable:
/// under 8 chars → `********`, 8–11 → first 2 + `…` + last 2,
/// 12 and up → first 4 + `…` + last 4.
pub fn redact(secret: &str) -> String {
    let chars: Vec<char> = secret.chars().collect();
    let take = |n: usize| -> (String, String) {
        (
            chars[..n].iter().collect(),
            chars[chars.len() - n..].iter().collect(),
        )
    };
    match chars.len() {
        0..=7 => "********".to_string(),
        8..=11 => {
            let (head, tail) = take(2);
            format!("{head}…{tail}")
        }
        _ => {
            let (head, tail) = take(4);
            format!("{head}…{tail}")
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Finding {
    /// Matched text, possibly redacted.
    pub candidate: String,
    pub file_path: String,
    pub line: usize,
    pub column: usize,
    pub pattern_id: String,
    pub entropy_bits: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Label>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secret_type: Option<TaxonomyClass>,
}

impl Finding {
    pub fn from_candidate(cand: &Candidate, verdict: Option<&Verdict>, redacted: bool) -> Finding {
        Finding {
            candidate: if redacted {
                redact(&cand.matched_text)
            } else {
                cand.matched_text.clone()
            },
            file_path: cand.file_path.clone(),
            line: cand.line,
            column: cand.column,
            pattern_id: cand.pattern_id.clone(),
            entropy_bits: cand.entropy_bits,
            verdict: verdict.and_then(|v| v.binary_label),
            secret_type: verdict.and_then(|v| v.type_label),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanSummary {
    pub files_scanned: usize,
    pub candidates: usize,
    pub classified_secret: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub tool_version: String,
    pub catalog_source: String,
    pub window_chars: usize,
    pub findings: Vec<Finding>,
    pub summary: ScanSummary,
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scan report (tool {}, catalog {}, window {} chars)\n",
            self.tool_version, self.catalog_source, self.window_chars
        ));
        if self.findings.is_empty() {
            out.push_str("no candidates found\n");
        } else {
            let headers = ["FILE", "LINE", "COL", "PATTERN", "ENTROPY", "CANDIDATE", "VERDICT"];
            let rows: Vec<[String; 7]> = self
                .findings
                .iter()
                .map(|f| {
                    let verdict = match (&f.verdict, &f.secret_type) {
                        (Some(label), _) => label.answer().to_string(),
                        (None, Some(ty)) => ty.name().to_string(),
                        (None, None) => "-".to_string(),
                    };
                    [
                        f.file_path.clone(),
                        f.line.to_string(),
                        f.column.to_string(),
                        f.pattern_id.clone(),
                        format!("{:.3}", f.entropy_bits),
                        f.candidate.clone(),
                        verdict,
                    ]
                })
                .collect();
            out.push_str(&render_table(&headers, &rows));
        }
        out.push_str(&format!(
            "files scanned: {}  candidates: {}  classified secret: {}  errors: {}\n",
            self.summary.files_scanned,
            self.summary.candidates,
            self.summary.classified_secret,
            self.summary.errors
        ));
        out
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub tool_version: String,
    pub dataset: String,
    pub backend: String,
    pub model_id: String,
    pub mode: String,
    pub shots: usize,
    pub examples: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "evaluation report (tool {}, dataset {}, backend {}, model {}, mode {}, shots {}, {} examples)\n",
            self.tool_version,
            self.dataset,
            self.backend,
            self.model_id,
            self.mode,
            self.shots,
            self.examples
        ));

        let headers = ["CLASS", "PRECISION", "RECALL", "F1", "F2", "SUPPORT"];
        let mut rows: Vec<[String; 6]> = self
            .metrics
            .per_class
            .iter()
            .map(|c| {
                [
                    c.class.clone(),
                    format_score(c.precision),
                    format_score(c.recall),
                    format_score(c.f1),
                    format_score(c.f2),
                    c.support.to_string(),
                ]
            })
            .collect();
        let m = &self.metrics.macro_avg;
        rows.push([
            "macro avg".into(),
            format_score(m.precision),
            format_score(m.recall),
            format_score(m.f1),
            format_score(m.f2),
            self.confusion.total().to_string(),
        ]);
        rows.push([
            "weighted avg".into(),
            "-".into(),
            "-".into(),
            format_score(self.metrics.weighted.f1),
            format_score(self.metrics.weighted.f2),
            self.confusion.total().to_string(),
        ]);
        out.push_str(&render_table(&headers, &rows));
        out.push_str(&format!("accuracy: {}\n", format_score(self.metrics.accuracy)));
        out
    }
}

fn render_table<const N: usize>(headers: &[&str; N], rows: &[[String; N]]) -> String {
    let mut widths: [usize; N] = headers.map(str::len);
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String; N], out: &mut String| {
        let line = cells
            .iter()
            .zip(widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect::<Vec<_>>()
            .join("  ");
        out.push_str(line.trim_end());
        out.push('\n');
    };
    render_row(&headers.map(String::from), &mut out);
    for row in rows {
        render_row(row, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn redact_follows_the_length_rules() {
        assert_eq!(redact("short"), "********");
        assert_eq!(redact(""), "********");
        assert_eq!(redact("1234567"), "********");
        assert_eq!(redact("12345678"), "12…78");
        assert_eq!(redact("12345678901"), "12…01");
        assert_eq!(redact("123456789012"), "1234…9012");
        assert_eq!(redact("sk_test_4eC39HqLyjWDarjtT1zdp7dc"), "sk_t…p7dc");
    }

    #[test]
    fn redact_never_echoes_long_inputs() {
        for len in 8..64 {
            let input: String = ('a'..='z').cycle().take(len).collect();
            assert_ne!(redact(&input), input, "len {len}");
        }
    }

    #[test]
    fn redact_counts_chars_not_bytes() {
        // 10 chars, multibyte: middle rule, ends preserved charwise.
        assert_eq!(redact("ααββγγδδεε"), "αα…εε");
    }

    #[test]
    fn tables_align_and_reports_serialize_deterministically() {
        let report = ScanReport {
            tool_version: "0.1.0".into(),
            catalog_source: "builtin".into(),
            window_chars: 200,
            findings: vec![Finding {
                candidate: "AKIA…H3BD".into(),
                file_path: "cfg/a.env".into(),
                line: 2,
                column: 10,
                pattern_id: "aws_access_key_id".into(),
                entropy_bits: 4.2219280948873623,
                verdict: Some(Label::Secret),
                secret_type: None,
            }],
            summary: ScanSummary {
                files_scanned: 1,
                candidates: 1,
                classified_secret: 1,
                errors: 0,
            },
        };
        assert_eq!(report.to_json(), report.to_json());
        let table = report.to_table();
        assert!(table.contains("aws_access_key_id"));
        assert!(table.contains("classified secret: 1"));
        // JSON keeps verdict but omits the absent secret_type.
        let json = report.to_json();
        assert!(json.contains("\"verdict\": \"Secret\""));
        assert!(!json.contains("secret_type"));
    }
}
