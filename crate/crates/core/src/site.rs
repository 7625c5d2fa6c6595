//! Site-selection scoring matrix.
//!
//! Four pillars, three sub-criteria each, every sub-criterion scored 0 (no
//! potential), 1 (medium) or 2 (high). Pillars are unweighted, so the best
//! possible site totals 24.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

pub const CRITERIA_PER_PILLAR: usize = 3;
pub const CRITERIA_COUNT: usize = 12;
pub const MAX_SCORE: u8 = 2;
pub const MAX_TOTAL: u32 = 24;

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("expected {CRITERIA_COUNT} sub-criterion scores, got {0}")]
    WrongCount(usize),
    #[error("score {score} for `{criterion}` is outside 0..=2")]
    OutOfRange { criterion: &'static str, score: i64 },
    #[error("pillar {pillar:?} has {count} entries, expected {CRITERIA_PER_PILLAR}")]
    PillarCount { pillar: Pillar, count: usize },
    #[error("duplicate site name `{0}`")]
    DuplicateSite(String),
    #[error("no sites")]
    NoSites,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read scorecard file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Pillar {
    Assembly,
    Connection,
    Operation,
    Maintenance,
}

impl Pillar {
    pub const ALL: [Pillar; 4] = [
        Pillar::Assembly,
        Pillar::Connection,
        Pillar::Operation,
        Pillar::Maintenance,
    ];

    pub fn title(&self) -> &'static str {
        match self {
            Pillar::Assembly => "Viability of BESS assembly",
            Pillar::Connection => "Suitability of BESS connection",
            Pillar::Operation => "Profitability of BESS operation",
            Pillar::Maintenance => "Possibility of BESS maintenance",
        }
    }

    pub fn criteria(&self) -> [&'static str; CRITERIA_PER_PILLAR] {
        match self {
            Pillar::Assembly => [
                "land availability",
                "container footprint",
                "soil conditions",
            ],
            Pillar::Connection => [
                "affordable connection fee",
                "accessible permit process",
                "available transformer",
            ],
            Pillar::Operation => [
                "proximity to network congestion points",
                "renewable supply",
                "local load profiles",
            ],
            Pillar::Maintenance => ["safety standards", "access roads", "noise constraints"],
        }
    }
}

/// The twelve sub-criteria in file column order.
pub fn criteria_layout() -> impl Iterator<Item = (Pillar, &'static str)> {
    Pillar::ALL
        .into_iter()
        .flat_map(|p| p.criteria().into_iter().map(move |c| (p, c)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubCriterion {
    pub pillar: Pillar,
    pub name: &'static str,
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScoreCard {
    site_name: String,
    entries: Vec<SubCriterion>,
    total: u32,
}

impl ScoreCard {
    /// Checks the 3-per-pillar layout and score range, then totals.
    pub fn from_entries(
        site_name: impl Into<String>,
        entries: Vec<SubCriterion>,
    ) -> Result<Self, ScoringError> {
        if entries.len() != CRITERIA_COUNT {
            return Err(ScoringError::WrongCount(entries.len()));
        }
        for pillar in Pillar::ALL {
            let count = entries.iter().filter(|e| e.pillar == pillar).count();
            if count != CRITERIA_PER_PILLAR {
                return Err(ScoringError::PillarCount { pillar, count });
            }
        }
        if let Some(bad) = entries.iter().find(|e| e.score > MAX_SCORE) {
            return Err(ScoringError::OutOfRange {
                criterion: bad.name,
                score: bad.score as i64,
            });
        }
        let total = entries.iter().map(|e| e.score as u32).sum();
        Ok(Self {
            site_name: site_name.into(),
            entries,
            total,
        })
    }

    pub fn site_name(&self) -> &str {
        &self.site_name
    }

    pub fn entries(&self) -> &[SubCriterion] {
        &self.entries
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn pillar_total(&self, pillar: Pillar) -> u32 {
        self.entries
            .iter()
            .filter(|e| e.pillar == pillar)
            .map(|e| e.score as u32)
            .sum()
    }
}

/// Builds a scorecard from twelve scores given in [`criteria_layout`] order.
pub fn score_site(site_name: &str, scores: &[i64]) -> Result<ScoreCard, ScoringError> {
    if scores.len() != CRITERIA_COUNT {
        return Err(ScoringError::WrongCount(scores.len()));
    }
    let mut entries = Vec::with_capacity(CRITERIA_COUNT);
    for ((pillar, name), &score) in criteria_layout().zip(scores) {
        if !(0..=MAX_SCORE as i64).contains(&score) {
            return Err(ScoringError::OutOfRange {
                criterion: name,
                score,
            });
        }
        entries.push(SubCriterion {
            pillar,
            name,
            score: score as u8,
        });
    }
    ScoreCard::from_entries(site_name, entries)
}

/// Highest total first; equal totals fall back to site name order.
pub fn rank_sites(cards: Vec<ScoreCard>) -> Result<Vec<ScoreCard>, ScoringError> {
    if cards.is_empty() {
        return Err(ScoringError::NoSites);
    }
    let mut seen = HashSet::new();
    for card in &cards {
        if !seen.insert(card.site_name.as_str()) {
            return Err(ScoringError::DuplicateSite(card.site_name.clone()));
        }
    }
    let mut ranked = cards;
    ranked.sort_by(|a, b| {
        b.total
            .cmp(&a.total)
            .then_with(|| a.site_name.cmp(&b.site_name))
    });
    Ok(ranked)
}

#[derive(Debug, Clone, Serialize)]
pub struct ScoringReport {
    pub ranked: Vec<ScoreCard>,
    pub recommended: String,
    /// Other sites sharing the top total, if any.
    pub tied_with: Vec<String>,
}

pub fn scoring_report(cards: Vec<ScoreCard>) -> Result<ScoringReport, ScoringError> {
    let ranked = rank_sites(cards)?;
    let top = ranked[0].total;
    let recommended = ranked[0].site_name.clone();
    let tied_with = ranked[1..]
        .iter()
        .take_while(|c| c.total == top)
        .map(|c| c.site_name.clone())
        .collect();
    Ok(ScoringReport {
        ranked,
        recommended,
        tied_with,
    })
}

impl ScoringReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Site selection report\n");
        let _ = writeln!(
            out,
            "| Rank | Site | Assembly | Connection | Operation | Maintenance | Total |"
        );
        let _ = writeln!(out, "|---:|---|---:|---:|---:|---:|---:|");
        for (i, card) in self.ranked.iter().enumerate() {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {}/{} |",
                i + 1,
                card.site_name,
                card.pillar_total(Pillar::Assembly),
                card.pillar_total(Pillar::Connection),
                card.pillar_total(Pillar::Operation),
                card.pillar_total(Pillar::Maintenance),
                card.total,
                MAX_TOTAL
            );
        }
        let _ = writeln!(out, "\n## Sub-criteria\n");
        let mut header = String::from("| Pillar | Criterion |");
        let mut rule = String::from("|---|---|");
        for card in &self.ranked {
            let _ = write!(header, " {} |", card.site_name);
            rule.push_str("---:|");
        }
        let _ = writeln!(out, "{header}\n{rule}");
        for (idx, (pillar, name)) in criteria_layout().enumerate() {
            let _ = write!(out, "| {pillar:?} | {name} |");
            for card in &self.ranked {
                let _ = write!(out, " {} |", card.entries[idx].score);
            }
            out.push('\n');
        }
        let _ = writeln!(out, "\n## Recommendation\n");
        let _ = writeln!(
            out,
            "Recommended site: **{}** ({}/{}).",
            self.recommended, self.ranked[0].total, MAX_TOTAL
        );
        if !self.tied_with.is_empty() {
            let _ = writeln!(
                out,
                "\nTie at the top with {}; recommendation follows name order.",
                self.tied_with.join(", ")
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,site,assembly,connection,operation,maintenance,total\n");
        for (i, card) in self.ranked.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                i + 1,
                csv_field(&card.site_name),
                card.pillar_total(Pillar::Assembly),
                card.pillar_total(Pillar::Connection),
                card.pillar_total(Pillar::Operation),
                card.pillar_total(Pillar::Maintenance),
                card.total
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Parses scorecards: one site per line, `name,s1,...,s12`. Blank lines and
/// lines starting with `#` are skipped. An optional header starting with
/// `site` is allowed on the first record.
pub fn parse_scorecards(text: &str) -> Result<Vec<ScoreCard>, ScoringError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut cards = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ScoringError::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(i + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if cards.is_empty()
            && record
                .get(0)
                .is_some_and(|f| f.eq_ignore_ascii_case("site"))
        {
            continue;
        }
        let name = record.get(0).unwrap_or_default();
        if name.is_empty() {
            return Err(ScoringError::Parse {
                line,
                message: "missing site name".into(),
            });
        }
        let scores = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<i64>().map_err(|_| ScoringError::Parse {
                    line,
                    message: format!("`{f}` is not an integer score"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let card = score_site(name, &scores).map_err(|e| ScoringError::Parse {
            line,
            message: e.to_string(),
        })?;
        cards.push(card);
    }
    if cards.is_empty() {
        return Err(ScoringError::NoSites);
    }
    Ok(cards)
}

pub fn read_scorecards(path: &Path) -> Result<Vec<ScoreCard>, ScoringError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScoringError::Io(format!("{}: {e}", path.display())))?;
    parse_scorecards(&text)
}
