//! Reading and writing Preflib-style ordinal ballot files.
//!
//! Supported formats: `.soc` (complete strict orders) and `.soi`
//! (top-truncated strict orders). Metadata lines are `# KEY: VALUE`; data
//! lines are `<multiplicity>: <id>,<id>,…` with 1-based alternative ids.
//! Formats with ties (`.toc`/`.toi`, `{…}` groups) are rejected as a
//! capability error, never silently mis-read.

use crate::election::{Election, Vote};
use crate::error::Error;
use crate::seeding;
use crate::Result;
use rand::Rng;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreflibType {
    Soc,
    Soi,
}

impl PreflibType {
    pub fn as_str(&self) -> &'static str {
        match self {
            PreflibType::Soc => "soc",
            PreflibType::Soi => "soi",
        }
    }
}

/// Parsed metadata block. Unknown keys are kept verbatim, in order, so a
/// parse → write cycle loses nothing a downstream tool might need.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PreflibHeader {
    pub file_name: String,
    pub title: String,
    pub data_type: Option<PreflibType>,
    pub number_alternatives: Option<usize>,
    pub number_voters: Option<usize>,
    pub number_unique_orders: Option<usize>,
    pub alternative_names: BTreeMap<usize, String>,
    pub extra: Vec<(String, String)>,
}

/// Result of parsing one file. Non-fatal inconsistencies (declared counts
/// that disagree with the data) are reported as warnings, not errors.
#[derive(Debug, Clone)]
pub struct PreflibFile {
    pub header: PreflibHeader,
    pub election: Election,
    pub warnings: Vec<String>,
}

fn parse_header_line(
    line_no: usize,
    line: &str,
    header: &mut PreflibHeader,
) -> Result<()> {
    let body = line.trim_start_matches('#').trim();
    let Some((key, value)) = body.split_once(':') else {
        // Bare comment without a colon; keep it as an unknown key.
        header.extra.push((body.to_string(), String::new()));
        return Ok(());
    };
    let key_norm = key.trim().to_ascii_uppercase();
    let value = value.trim();
    match key_norm.as_str() {
        "FILE NAME" => header.file_name = value.to_string(),
        "TITLE" => header.title = value.to_string(),
        "DATA TYPE" => {
            header.data_type = Some(match value.to_ascii_lowercase().as_str() {
                "soc" => PreflibType::Soc,
                "soi" => PreflibType::Soi,
                "toc" | "toi" => {
                    return Err(Error::capability(format!(
                        "data type {value} (orders with ties) is not supported"
                    )))
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        format!("unknown data type {other:?}"),
                    ))
                }
            });
        }
        "NUMBER ALTERNATIVES" => {
            header.number_alternatives = Some(value.parse().map_err(|e| {
                Error::parse(line_no, format!("bad alternative count {value:?}: {e}"))
            })?);
        }
        "NUMBER VOTERS" => {
            header.number_voters = Some(value.parse().map_err(|e| {
                Error::parse(line_no, format!("bad voter count {value:?}: {e}"))
            })?);
        }
        "NUMBER UNIQUE ORDERS" => {
            header.number_unique_orders = Some(value.parse().map_err(|e| {
                Error::parse(line_no, format!("bad unique order count {value:?}: {e}"))
            })?);
        }
        _ => {
            if let Some(idx) = key_norm.strip_prefix("ALTERNATIVE NAME ") {
                let idx: usize = idx.trim().parse().map_err(|e| {
                    Error::parse(line_no, format!("bad alternative index in {key:?}: {e}"))
                })?;
                header.alternative_names.insert(idx, value.to_string());
            } else {
                header.extra.push((key.trim().to_string(), value.to_string()));
            }
        }
    }
    Ok(())
}

/// Parses one `.soc`/`.soi` document.
pub fn parse_preflib(text: &str) -> Result<PreflibFile> {
    let mut header = PreflibHeader::default();
    let mut votes: Vec<Vote> = Vec::new();
    let mut data_lines = 0usize;
    let mut m: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if !votes.is_empty() {
                return Err(Error::parse(line_no, "metadata after data lines"));
            }
            parse_header_line(line_no, line, &mut header)?;
            continue;
        }
        if line.contains('{') || line.contains('}') {
            return Err(Error::capability(format!(
                "line {line_no}: tied alternatives ({{…}}) are not supported"
            )));
        }
        let m = *m.get_or_insert_with(|| header.number_alternatives.unwrap_or(0));
        if m == 0 {
            return Err(Error::parse(
                line_no,
                "data line before a NUMBER ALTERNATIVES header",
            ));
        }
        let Some((mult_str, ids_str)) = line.split_once(':') else {
            return Err(Error::parse(line_no, "expected '<multiplicity>: <ids>'"));
        };
        let mult: usize = mult_str.trim().parse().map_err(|e| {
            Error::parse(line_no, format!("bad multiplicity {:?}: {e}", mult_str.trim()))
        })?;
        if mult == 0 {
            return Err(Error::parse(line_no, "multiplicity must be positive"));
        }
        let mut top = Vec::new();
        let mut seen = vec![false; m];
        for id_str in ids_str.split(',') {
            let id_str = id_str.trim();
            if id_str.is_empty() {
                return Err(Error::parse(line_no, "empty alternative id"));
            }
            let id: usize = id_str.parse().map_err(|e| {
                Error::parse(line_no, format!("bad alternative id {id_str:?}: {e}"))
            })?;
            if id == 0 || id > m {
                return Err(Error::parse(
                    line_no,
                    format!("alternative id {id} out of range 1..={m}"),
                ));
            }
            if seen[id - 1] {
                return Err(Error::parse(
                    line_no,
                    format!("duplicate alternative {id}"),
                ));
            }
            seen[id - 1] = true;
            top.push(id - 1);
        }
        if header.data_type == Some(PreflibType::Soc) && top.len() != m {
            return Err(Error::parse(
                line_no,
                format!(
                    "soc line must rank all {m} alternatives, got {}",
                    top.len()
                ),
            ));
        }
        data_lines += 1;
        let vote = Vote::new(top, m).map_err(|e| Error::parse(line_no, e.to_string()))?;
        votes.extend(std::iter::repeat(vote).take(mult));
    }

    let m = m
        .or(header.number_alternatives)
        .ok_or_else(|| Error::parse(0, "file has no NUMBER ALTERNATIVES header and no data"))?;
    if votes.is_empty() {
        return Err(Error::parse(0, "file has no data lines"));
    }
    let mut warnings = Vec::new();
    if let Some(declared) = header.number_voters {
        if declared != votes.len() {
            warnings.push(format!(
                "declared NUMBER VOTERS {declared} but multiplicities sum to {}",
                votes.len()
            ));
        }
    }
    if let Some(declared) = header.number_unique_orders {
        if declared != data_lines {
            warnings.push(format!(
                "declared NUMBER UNIQUE ORDERS {declared} but file has {data_lines} data lines"
            ));
        }
    }
    if header.data_type.is_none() {
        warnings.push("no DATA TYPE header; assuming soi".to_string());
    }

    let mut election = Election::new(m, votes)?;
    if !header.alternative_names.is_empty() {
        let names: Vec<String> = (1..=m)
            .map(|i| {
                header
                    .alternative_names
                    .get(&i)
                    .cloned()
                    .unwrap_or_else(|| format!("alternative {i}"))
            })
            .collect();
        election = election.with_candidate_names(names)?;
    }
    let label = if header.file_name.is_empty() {
        header.title.clone()
    } else {
        file_stem_of(&header.file_name)
    };
    if !label.is_empty() {
        election = election.with_label(&label);
    }
    Ok(PreflibFile {
        header,
        election,
        warnings,
    })
}

fn file_stem_of(name: &str) -> String {
    Path::new(name)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| name.to_string())
}

/// Canonical serialisation: metadata block, then distinct votes in
/// lexicographic order with aggregated multiplicities. The data type and
/// the count fields are always derived from the election itself.
pub fn write_preflib(e: &Election, header: &PreflibHeader) -> String {
    let data_type = if e.is_complete() {
        PreflibType::Soc
    } else {
        PreflibType::Soi
    };
    let distinct = e.distinct_votes();
    let mut out = String::new();
    if !header.file_name.is_empty() {
        out.push_str(&format!("# FILE NAME: {}\n", header.file_name));
    }
    if !header.title.is_empty() {
        out.push_str(&format!("# TITLE: {}\n", header.title));
    }
    out.push_str(&format!("# DATA TYPE: {}\n", data_type.as_str()));
    out.push_str(&format!("# NUMBER ALTERNATIVES: {}\n", e.m()));
    out.push_str(&format!("# NUMBER VOTERS: {}\n", e.n()));
    out.push_str(&format!("# NUMBER UNIQUE ORDERS: {}\n", distinct.len()));
    let names = e.candidate_names();
    for c in 0..e.m() {
        let name = names
            .and_then(|ns| ns.get(c).cloned())
            .or_else(|| header.alternative_names.get(&(c + 1)).cloned());
        if let Some(name) = name {
            out.push_str(&format!("# ALTERNATIVE NAME {}: {}\n", c + 1, name));
        }
    }
    for (key, value) in &header.extra {
        if value.is_empty() {
            out.push_str(&format!("# {key}\n"));
        } else {
            out.push_str(&format!("# {key}: {value}\n"));
        }
    }
    for (vote, count) in &distinct {
        let ids: Vec<String> = vote.top().iter().map(|c| (c + 1).to_string()).collect();
        out.push_str(&format!("{count}: {}\n", ids.join(",")));
    }
    out
}

/// One file of a directory scan.
#[derive(Debug, Clone)]
pub struct ScannedElection {
    pub path: PathBuf,
    pub dataset: String,
    pub file: PreflibFile,
}

/// Directory scan outcome; unreadable or unparsable files are collected,
/// never fatal.
#[derive(Debug, Clone, Default)]
pub struct ScanOutcome {
    pub elections: Vec<ScannedElection>,
    pub skipped: Vec<(PathBuf, String)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanSampling {
    pub max_files_per_dataset: usize,
    pub seed: u64,
}

impl Default for ScanSampling {
    fn default() -> Self {
        ScanSampling {
            max_files_per_dataset: 10,
            seed: 0,
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1_0000_0000_01b3);
    }
    h
}

/// Scans a directory of `.soc`/`.soi` files grouped by the `<dataset>-`
/// file name prefix. Datasets larger than the cap contribute a seeded
/// uniform sample; sampling for one dataset never affects another.
pub fn scan_dataset_dir(dir: &Path, sampling: &ScanSampling) -> Result<ScanOutcome> {
    let mut outcome = ScanOutcome::default();
    let mut by_dataset: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        let ext = path
            .extension()
            .map(|e| e.to_string_lossy().to_ascii_lowercase());
        match ext.as_deref() {
            Some("soc") | Some("soi") => {}
            Some("toc") | Some("toi") => {
                outcome.skipped.push((
                    path.clone(),
                    "orders with ties are not supported".to_string(),
                ));
                continue;
            }
            _ => continue,
        }
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let dataset = stem.split('-').next().unwrap_or(&stem).to_string();
        by_dataset.entry(dataset).or_default().push(path);
    }
    if by_dataset.is_empty() {
        outcome
            .warnings
            .push(format!("no .soc/.soi files under {}", dir.display()));
        return Ok(outcome);
    }
    let cap = sampling.max_files_per_dataset.max(1);
    for (dataset, mut paths) in by_dataset {
        paths.sort();
        let chosen: Vec<PathBuf> = if paths.len() <= cap {
            paths
        } else {
            let mut rng =
                seeding::election_rng(seeding::derive(sampling.seed, fnv1a(dataset.as_bytes())));
            let mut idx: Vec<usize> = (0..paths.len()).collect();
            for pick in 0..cap {
                let j = rng.gen_range(pick..idx.len());
                idx.swap(pick, j);
            }
            let mut take: Vec<usize> = idx[..cap].to_vec();
            take.sort_unstable();
            outcome.warnings.push(format!(
                "dataset {dataset}: sampled {cap} of {} files",
                paths.len()
            ));
            take.into_iter().map(|i| paths[i].clone()).collect()
        };
        for path in chosen {
            let text = match std::fs::read_to_string(&path) {
                Ok(t) => t,
                Err(e) => {
                    outcome.skipped.push((path, e.to_string()));
                    continue;
                }
            };
            match parse_preflib(&text) {
                Ok(mut file) => {
                    // Prefer the on-disk name over the self-declared one.
                    let stem = path
                        .file_stem()
                        .map(|s| s.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    file.election = file.election.clone().with_label(&stem);
                    outcome.elections.push(ScannedElection {
                        path,
                        dataset: dataset.clone(),
                        file,
                    });
                }
                Err(e) => {
                    outcome.skipped.push((path, e.to_string()));
                }
            }
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOI_SAMPLE: &str = "\
# FILE NAME: 00099-00000001.soi
# TITLE: sample
# DATA TYPE: soi
# NUMBER ALTERNATIVES: 3
# NUMBER VOTERS: 3
# NUMBER UNIQUE ORDERS: 2
# ALTERNATIVE NAME 1: apple
# ALTERNATIVE NAME 2: pear
# ALTERNATIVE NAME 3: plum
2: 1,3
1: 2,1,3
";

    #[test]
    fn parses_truncated_lines_with_multiplicities() {
        let parsed = parse_preflib(SOI_SAMPLE).unwrap();
        let e = &parsed.election;
        assert_eq!(e.m(), 3);
        assert_eq!(e.n(), 3);
        assert_eq!(e.votes()[0].top(), &[0, 2]);
        assert_eq!(e.votes()[1].top(), &[0, 2]);
        assert_eq!(e.votes()[2].top(), &[1, 0, 2]);
        assert!(parsed.warnings.is_empty());
        assert_eq!(parsed.header.alternative_names[&2], "pear");
        assert_eq!(e.label(), "00099-00000001");
        assert_eq!(
            e.candidate_names().unwrap(),
            &["apple".to_string(), "pear".into(), "plum".into()]
        );
    }

    #[test]
    fn soc_requires_complete_lines() {
        let text = "\
# DATA TYPE: soc
# NUMBER ALTERNATIVES: 3
5: 2,1,3
";
        let parsed = parse_preflib(text).unwrap();
        assert_eq!(parsed.election.n(), 5);
        assert!(parsed.election.is_complete());

        let bad = "\
# DATA TYPE: soc
# NUMBER ALTERNATIVES: 3
5: 2,1
";
        match parse_preflib(bad) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("rank all 3"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_lines_carry_line_numbers() {
        let dup = "\
# NUMBER ALTERNATIVES: 3
1: 1,1,2
";
        match parse_preflib(dup) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("duplicate alternative"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let out_of_range = "\
# NUMBER ALTERNATIVES: 3
1: 1,4
";
        assert!(matches!(
            parse_preflib(out_of_range),
            Err(Error::Parse { line: 2, .. })
        ));
        let bad_mult = "\
# NUMBER ALTERNATIVES: 3
x: 1,2
";
        assert!(matches!(
            parse_preflib(bad_mult),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn ties_and_tie_types_are_capability_errors() {
        let toc = "# DATA TYPE: toc\n# NUMBER ALTERNATIVES: 3\n1: 1,2,3\n";
        assert!(matches!(parse_preflib(toc), Err(Error::Capability(_))));
        let braces = "# NUMBER ALTERNATIVES: 3\n1: 1,{2,3}\n";
        assert!(matches!(parse_preflib(braces), Err(Error::Capability(_))));
    }

    #[test]
    fn voter_count_mismatch_is_a_warning() {
        let text = "\
# NUMBER ALTERNATIVES: 2
# NUMBER VOTERS: 5
2: 1,2
";
        let parsed = parse_preflib(text).unwrap();
        assert_eq!(parsed.election.n(), 2);
        assert_eq!(parsed.warnings.len(), 2); // count mismatch + missing type
        assert!(parsed.warnings[0].contains("NUMBER VOTERS 5"));
    }

    #[test]
    fn unknown_keys_survive_roundtrip() {
        let text = "\
# FILE NAME: x.soc
# DATA TYPE: soc
# NUMBER ALTERNATIVES: 2
# PUBLICATION DATE: 2021-04-01
1: 1,2
1: 2,1
";
        let parsed = parse_preflib(text).unwrap();
        assert_eq!(
            parsed.header.extra,
            vec![("PUBLICATION DATE".to_string(), "2021-04-01".to_string())]
        );
        let written = write_preflib(&parsed.election, &parsed.header);
        assert!(written.contains("# PUBLICATION DATE: 2021-04-01\n"));
        let back = parse_preflib(&written).unwrap();
        assert_eq!(back.header.extra, parsed.header.extra);
    }

    #[test]
    fn writer_aggregates_and_sorts() {
        let votes = vec![
            Vote::complete(vec![1, 0], 2).unwrap(),
            Vote::complete(vec![0, 1], 2).unwrap(),
            Vote::complete(vec![1, 0], 2).unwrap(),
        ];
        let e = Election::new(2, votes).unwrap();
        let text = write_preflib(&e, &PreflibHeader::default());
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["1: 1,2", "2: 2,1"]);
        assert!(text.contains("# DATA TYPE: soc\n"));
        assert!(text.contains("# NUMBER UNIQUE ORDERS: 2\n"));
    }

    #[test]
    fn truncated_elections_write_as_soi() {
        let votes = vec![Vote::new(vec![0], 3).unwrap(); 2];
        let e = Election::new(3, votes).unwrap();
        let text = write_preflib(&e, &PreflibHeader::default());
        assert!(text.contains("# DATA TYPE: soi\n"));
        assert!(text.ends_with("2: 1\n"));
    }

    #[test]
    fn roundtrip_on_random_elections() {
        use crate::cultures::{sample_election, CultureKind, CultureSpec};
        for seed in 0..50 {
            let kinds = [
                CultureKind::Impartial,
                CultureKind::Urn { alpha: 1.0 },
                CultureKind::SpConitzer,
            ];
            let kind = kinds[seed as usize % kinds.len()];
            let e = sample_election(&CultureSpec { kind, m: 5, n: 12, seed }).unwrap();
            let text = write_preflib(&e, &PreflibHeader::default());
            let back = parse_preflib(&text).unwrap().election;
            assert_eq!(back.m(), e.m());
            assert_eq!(back.n(), e.n());
            let mut a = e.votes().to_vec();
            let mut b = back.votes().to_vec();
            a.sort();
            b.sort();
            assert_eq!(a, b, "seed {seed}");
        }
    }

    #[test]
    fn scan_groups_and_samples_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        // One big dataset (25 files) and one small (2 files).
        for i in 0..25 {
            let path = dir.path().join(format!("00042-{i:08}.soc"));
            let text = format!(
                "# DATA TYPE: soc\n# NUMBER ALTERNATIVES: 3\n{}: 1,2,3\n",
                i + 1
            );
            std::fs::write(path, text).unwrap();
        }
        for i in 0..2 {
            let path = dir.path().join(format!("00007-{i:08}.soi"));
            std::fs::write(path, "# NUMBER ALTERNATIVES: 2\n1: 1\n").unwrap();
        }
        std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        std::fs::write(dir.path().join("00009-00000001.toi"), "x").unwrap();

        let sampling = ScanSampling { max_files_per_dataset: 10, seed: 5 };
        let a = scan_dataset_dir(dir.path(), &sampling).unwrap();
        let b = scan_dataset_dir(dir.path(), &sampling).unwrap();
        let names = |o: &ScanOutcome| -> Vec<String> {
            o.elections
                .iter()
                .map(|s| s.path.file_name().unwrap().to_string_lossy().into_owned())
                .collect()
        };
        assert_eq!(names(&a), names(&b));
        let big: Vec<_> = a.elections.iter().filter(|s| s.dataset == "00042").collect();
        assert_eq!(big.len(), 10);
        let small: Vec<_> = a.elections.iter().filter(|s| s.dataset == "00007").collect();
        assert_eq!(small.len(), 2);
        // The .toi file is reported, not parsed.
        assert!(a.skipped.iter().any(|(p, _)| p.extension().unwrap() == "toi"));
        // A different seed picks a different sample of the big dataset.
        let c = scan_dataset_dir(
            dir.path(),
            &ScanSampling { max_files_per_dataset: 10, seed: 6 },
        )
        .unwrap();
        assert_ne!(names(&a), names(&c));
    }

    #[test]
    fn empty_directory_warns() {
        let dir = tempfile::tempdir().unwrap();
        let out = scan_dataset_dir(dir.path(), &ScanSampling::default()).unwrap();
        assert!(out.elections.is_empty());
        assert_eq!(out.warnings.len(), 1);
    }
}
