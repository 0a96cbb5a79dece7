//! Reproducible dataset construction.
//!
//! Two plans are supported: a balanced holdout (sample the size of the
//! smallest subgroup from every subgroup, then split each subgroup into
//! train and test independently) and a stratified k-fold split. Both can
//! be preceded by a per-(PET, label) cap.
//!
//! All randomness comes from [`rng`]: a ChaCha8 generator seeded from the
//! plan seed, with a separate stream per stage. Results are reproducible
//! within a build; the generator identifier is written to every manifest.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Example, Label};
use crate::error::{Error, Result};

pub const GENERATOR_ID: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

/// Random stream used by each stage, so stages never share draws.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stage {
    BalancedSample = 1,
    TrainTest = 2,
    Cap = 3,
    KFold = 4,
    Model = 5,
}

pub fn rng(seed: u64, stage: Stage) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stage as u64);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupKey {
    EuphLabel,
    VagueLabel,
}

impl SubgroupKey {
    pub fn name(self) -> &'static str {
        match self {
            SubgroupKey::EuphLabel => "euph_label",
            SubgroupKey::VagueLabel => "vague_label",
        }
    }

    pub fn get(self, ex: &Example) -> Option<Label> {
        match self {
            SubgroupKey::EuphLabel => Some(ex.euph_label),
            SubgroupKey::VagueLabel => ex.vague_label,
        }
    }
}

impl FromStr for SubgroupKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euph_label" | "euph" => Ok(SubgroupKey::EuphLabel),
            "vague_label" | "vague" => Ok(SubgroupKey::VagueLabel),
            other => Err(Error::SplitPlan(format!("unknown subgroup key `{other}`"))),
        }
    }
}

/// One cell of the label cross product, e.g. `euph_label=1,vague_label=0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Subgroup(pub Vec<(SubgroupKey, Label)>);

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(k, l)| format!("{}={l}", k.name())).collect();
        f.write_str(&parts.join(","))
    }
}

impl From<Subgroup> for String {
    fn from(s: Subgroup) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Subgroup {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        if s.is_empty() {
            return Ok(Subgroup(Vec::new()));
        }
        s.split(',')
            .map(|part| {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| Error::SplitPlan(format!("bad subgroup `{s}`")))?;
                Ok((k.parse()?, v.parse()?))
            })
            .collect::<Result<_>>()
            .map(Subgroup)
    }
}

impl Subgroup {
    pub fn label(&self, key: SubgroupKey) -> Option<Label> {
        self.0.iter().find(|(k, _)| *k == key).map(|(_, l)| *l)
    }
}

/// Subgroup → example ids, in corpus order. Contains every cell of the
/// label cross product, empty ones included.
pub type Partition = BTreeMap<Subgroup, Vec<String>>;

pub fn subgroup_partition(corpus: &Corpus, keys: &[SubgroupKey]) -> Result<Partition> {
    let mut part: Partition = BTreeMap::new();
    let mut cells: Vec<Vec<(SubgroupKey, Label)>> = vec![Vec::new()];
    for &k in keys {
        cells = cells
            .into_iter()
            .flat_map(|c| {
                Label::BOTH.map(|l| {
                    let mut c = c.clone();
                    c.push((k, l));
                    c
                })
            })
            .collect();
    }
    for c in cells {
        part.insert(Subgroup(c), Vec::new());
    }
    for ex in corpus.examples() {
        let cell = keys
            .iter()
            .map(|&k| {
                k.get(ex).map(|l| (k, l)).ok_or_else(|| Error::MissingLabel {
                    id: ex.id.clone(),
                    key: k.name().into(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        part.entry(Subgroup(cell)).or_default().push(ex.id.clone());
    }
    Ok(part)
}

/// Draws `min subgroup size` ids from every subgroup, without replacement.
pub fn balanced_sample(subgroups: &Partition, seed: u64) -> Result<Partition> {
    if subgroups.len() < 2 {
        return Err(Error::SplitPlan("balanced sampling needs at least 2 subgroups".into()));
    }
    if let Some((g, _)) = subgroups.iter().find(|(_, ids)| ids.is_empty()) {
        return Err(Error::EmptySubgroup(g.to_string()));
    }
    let n_min = subgroups.values().map(Vec::len).min().unwrap_or(0);
    let mut rng = rng(seed, Stage::BalancedSample);
    Ok(subgroups
        .iter()
        .map(|(g, ids)| {
            let picked: Vec<String> = ids.choose_multiple(&mut rng, n_min).cloned().collect();
            (g.clone(), picked)
        })
        .collect())
}

/// Train size for `n` items: `floor(ratio × n)`.
pub fn train_count(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64) + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupCount {
    pub subgroup: Subgroup,
    pub available: usize,
    /// Train/test counts for a holdout, per-fold counts for k-fold.
    pub per_split: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Split {
    Holdout { train: Vec<String>, test: Vec<String> },
    Folds { folds: Vec<Vec<String>> },
}

impl Split {
    /// (train, test) id lists for each run: one for a holdout, one per fold.
    pub fn runs(&self) -> Vec<(Vec<String>, Vec<String>)> {
        match self {
            Split::Holdout { train, test } => vec![(train.clone(), test.clone())],
            Split::Folds { folds } => (0..folds.len())
                .map(|i| {
                    let train = folds
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .flat_map(|(_, f)| f.iter().cloned())
                        .collect();
                    (train, folds[i].clone())
                })
                .collect(),
        }
    }

    fn named_parts(&self) -> Vec<(String, &[String])> {
        match self {
            Split::Holdout { train, test } => vec![("train".into(), train), ("test".into(), test)],
            Split::Folds { folds } => folds
                .iter()
                .enumerate()
                .map(|(i, f)| (format!("fold{i}"), f.as_slice()))
                .collect(),
        }
    }
}

/// Per-split subgroup sizes after a within-subgroup train/test split.
pub fn train_test_split(sampled: &Partition, ratio: f64, seed: u64) -> Result<(Split, Vec<SubgroupCount>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::SplitPlan(format!("train_ratio {ratio} outside (0, 1)")));
    }
    let mut rng = rng(seed, Stage::TrainTest);
    let (mut train, mut test, mut report) = (Vec::new(), Vec::new(), Vec::new());
    for (g, ids) in sampled {
        let n = ids.len();
        let n_train = train_count(n, ratio);
        if n_train == 0 || n_train == n {
            return Err(Error::SubgroupTooSmall {
                subgroup: g.to_string(),
                size: n,
            });
        }
        let mut ids = ids.clone();
        ids.shuffle(&mut rng);
        test.extend(ids.split_off(n_train));
        train.extend(ids);
        report.push(SubgroupCount {
            subgroup: g.clone(),
            available: n,
            per_split: vec![n_train, n - n_train],
        });
    }
    Ok((Split::Holdout { train, test }, report))
}

/// Keeps at most `cap` examples per (PET, euphemism label) pair, sampled
/// uniformly; retained examples keep their corpus order.
pub fn cap_per_pet(corpus: &Corpus, cap: usize, seed: u64) -> Corpus {
    let mut groups: BTreeMap<(String, Label), Vec<&str>> = BTreeMap::new();
    for ex in corpus.examples() {
        groups.entry((ex.pet_key(), ex.euph_label)).or_default().push(&ex.id);
    }
    let mut rng = rng(seed, Stage::Cap);
    let mut keep: HashSet<&str> = HashSet::with_capacity(corpus.len());
    for ids in groups.values() {
        if ids.len() > cap {
            keep.extend(ids.choose_multiple(&mut rng, cap).copied());
        } else {
            keep.extend(ids.iter().copied());
        }
    }
    corpus.filter(|e| keep.contains(e.id.as_str()))
}

/// Deals each shuffled stratum round-robin over `k` folds, continuing the
/// deal position across strata so fold sizes differ by at most one.
pub fn stratified_kfold(corpus: &Corpus, k: usize, strata_keys: &[SubgroupKey], seed: u64) -> Result<(Split, Vec<SubgroupCount>)> {
    if k < 2 {
        return Err(Error::SplitPlan(format!("k = {k}, need at least 2")));
    }
    let strata = subgroup_partition(corpus, strata_keys)?;
    let mut rng = rng(seed, Stage::KFold);
    let mut folds = vec![Vec::new(); k];
    let mut report = Vec::new();
    let mut offset = 0;
    for (g, ids) in &strata {
        if ids.is_empty() {
            continue;
        }
        if ids.len() < k {
            return Err(Error::StratumTooSmall {
                stratum: g.to_string(),
                size: ids.len(),
                k,
            });
        }
        let mut ids = ids.clone();
        ids.shuffle(&mut rng);
        let mut per_fold = vec![0; k];
        for (j, id) in ids.iter().enumerate() {
            let f = (offset + j) % k;
            folds[f].push(id.clone());
            per_fold[f] += 1;
        }
        offset = (offset + ids.len()) % k;
        report.push(SubgroupCount {
            subgroup: g.clone(),
            available: ids.len(),
            per_split: per_fold,
        });
    }
    Ok((Split::Folds { folds }, report))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    BalancedHoldout,
    StratifiedKfold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitPlan {
    pub kind: SplitKind,
    pub subgroup_keys: Vec<SubgroupKey>,
    pub train_ratio: f64,
    pub k: usize,
    pub per_pet_cap: Option<usize>,
    pub seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self::balanced_holdout(0)
    }
}

impl SplitPlan {
    pub fn balanced_holdout(seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::BalancedHoldout,
            subgroup_keys: vec![SubgroupKey::EuphLabel, SubgroupKey::VagueLabel],
            train_ratio: 0.8,
            k: 5,
            per_pet_cap: None,
            seed,
        }
    }

    pub fn stratified_kfold(seed: u64) -> Self {
        SplitPlan {
            kind: SplitKind::StratifiedKfold,
            subgroup_keys: vec![SubgroupKey::EuphLabel],
            train_ratio: 0.8,
            k: 5,
            per_pet_cap: Some(40),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::SplitPlan(format!("train_ratio {} outside (0, 1)", self.train_ratio)));
        }
        if self.k < 2 {
            return Err(Error::SplitPlan(format!("k = {}, need at least 2", self.k)));
        }
        if self.subgroup_keys.is_empty() {
            return Err(Error::SplitPlan("no subgroup keys".into()));
        }
        let unique: BTreeSet<_> = self.subgroup_keys.iter().collect();
        if unique.len() != self.subgroup_keys.len() {
            return Err(Error::SplitPlan("repeated subgroup key".into()));
        }
        if self.per_pet_cap == Some(0) {
            return Err(Error::SplitPlan("per_pet_cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetSplitCounts {
    pub split: String,
    pub unique_pets: usize,
    pub ambiguous_pets: usize,
}

/// Unique/ambiguous PET counts per split, with warnings where two splits
/// differ by more than 10%.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetReport {
    pub splits: Vec<PetSplitCounts>,
    pub warnings: Vec<String>,
}

pub const PET_BALANCE_TOLERANCE: f64 = 0.10;

pub fn pet_report(corpus: &Corpus, split: &Split) -> PetReport {
    let mut splits = Vec::new();
    for (name, ids) in split.named_parts() {
        let mut labels: BTreeMap<String, BTreeSet<Label>> = BTreeMap::new();
        for ex in ids.iter().filter_map(|id| corpus.get(id)) {
            labels.entry(ex.pet_key()).or_default().insert(ex.euph_label);
        }
        splits.push(PetSplitCounts {
            split: name,
            unique_pets: labels.len(),
            ambiguous_pets: labels.values().filter(|l| l.len() == 2).count(),
        });
    }
    let differs = |a: usize, b: usize| {
        let hi = a.max(b);
        hi > 0 && (a.abs_diff(b) as f64 / hi as f64) > PET_BALANCE_TOLERANCE
    };
    let mut warnings = Vec::new();
    for (i, a) in splits.iter().enumerate() {
        for b in &splits[i + 1..] {
            if differs(a.unique_pets, b.unique_pets) {
                warnings.push(format!(
                    "unique PETs differ by more than 10%: {} has {}, {} has {}",
                    a.split, a.unique_pets, b.split, b.unique_pets
                ));
            }
            if differs(a.ambiguous_pets, b.ambiguous_pets) {
                warnings.push(format!(
                    "ambiguous PETs differ by more than 10%: {} has {}, {} has {}",
                    a.split, a.ambiguous_pets, b.split, b.ambiguous_pets
                ));
            }
        }
    }
    PetReport { splits, warnings }
}

/// A persisted split manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub plan: SplitPlan,
    pub generator: String,
    pub split: Split,
    pub subgroup_report: Vec<SubgroupCount>,
    pub pet_report: PetReport,
}

impl Dataset {
    /// Asserts the disjointness invariants of the split.
    pub fn check_disjoint(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (_, ids) in self.split.named_parts() {
            for id in ids {
                if !seen.insert(id.as_str()) {
                    return Err(Error::Leakage(id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}

/// Runs a whole plan: optional cap, then holdout or k-fold.
pub fn build_dataset(corpus: &Corpus, plan: &SplitPlan) -> Result<Dataset> {
    plan.validate()?;
    let capped;
    let corpus = match plan.per_pet_cap {
        Some(cap) => {
            capped = cap_per_pet(corpus, cap, plan.seed);
            &capped
        }
        None => corpus,
    };
    let (split, subgroup_report) = match plan.kind {
        SplitKind::BalancedHoldout => {
            let part = subgroup_partition(corpus, &plan.subgroup_keys)?;
            let sampled = balanced_sample(&part, plan.seed)?;
            let (split, mut report) = train_test_split(&sampled, plan.train_ratio, plan.seed)?;
            for r in &mut report {
                r.available = part[&r.subgroup].len();
            }
            (split, report)
        }
        SplitKind::StratifiedKfold => stratified_kfold(corpus, plan.k, &plan.subgroup_keys, plan.seed)?,
    };
    let dataset = Dataset {
        plan: plan.clone(),
        generator: GENERATOR_ID.into(),
        pet_report: pet_report(corpus, &split),
        split,
        subgroup_report,
    };
    dataset.check_disjoint()?;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(id: usize, pet: &str, euph: Label, vague: Option<Label>) -> Example {
        Example {
            id: format!("e{id}"),
            language: "en".into(),
            text: format!("x <{pet}> y"),
            pet: pet.into(),
            euph_label: euph,
            vague_label: vague,
            source: String::new(),
            country: None,
        }
    }

    /// Corpus with the given (euph, vague) subgroup sizes, in SUBGROUP order 11,10,01,00.
    fn sized(sizes: [usize; 4]) -> Corpus {
        let combos = [(Label::One, Label::One), (Label::One, Label::Zero), (Label::Zero, Label::One), (Label::Zero, Label::Zero)];
        let mut exs = Vec::new();
        for (n, (e, v)) in sizes.iter().zip(combos) {
            for _ in 0..*n {
                let i = exs.len();
                exs.push(ex(i, &format!("pet{}", i % 7), e, Some(v)));
            }
        }
        Corpus::new(exs).unwrap()
    }

    const EV: [SubgroupKey; 2] = [SubgroupKey::EuphLabel, SubgroupKey::VagueLabel];

    #[test]
    fn partition_sizes() {
        let p = subgroup_partition(&sized([408, 975, 361, 208]), &EV).unwrap();
        let mut sizes: Vec<usize> = p.values().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![208, 361, 408, 975]);
        let g = Subgroup(vec![(SubgroupKey::EuphLabel, Label::One), (SubgroupKey::VagueLabel, Label::Zero)]);
        assert_eq!(p[&g].len(), 975);
        assert_eq!(g.to_string(), "euph_label=1,vague_label=0");
        assert_eq!(Subgroup::try_from(g.to_string()).unwrap(), g);
    }

    #[test]
    fn partition_single_key_and_missing_label() {
        let p = subgroup_partition(&sized([3, 0, 2, 0]), &[SubgroupKey::EuphLabel]).unwrap();
        assert_eq!(p.len(), 2);
        let c = Corpus::new(vec![ex(0, "a", Label::One, None)]).unwrap();
        assert!(matches!(subgroup_partition(&c, &EV), Err(Error::MissingLabel { id, .. }) if id == "e0"));
    }

    #[test]
    fn paper_balancing_arithmetic() {
        let p = subgroup_partition(&sized([408, 975, 361, 208]), &EV).unwrap();
        let s = balanced_sample(&p, 7).unwrap();
        assert!(s.values().all(|ids| ids.len() == 208));
        assert_eq!(s.values().map(Vec::len).sum::<usize>(), 832);
        let (split, report) = train_test_split(&s, 0.8, 7).unwrap();
        let Split::Holdout { train, test } = split else { panic!() };
        assert_eq!((train.len(), test.len()), (664, 168));
        assert!(report.iter().all(|r| r.per_split == vec![166, 42]));
    }

    #[test]
    fn sample_equals_population_and_small_split() {
        let p = subgroup_partition(&sized([5, 5, 5, 5]), &EV).unwrap();
        let s = balanced_sample(&p, 1).unwrap();
        let mut all: Vec<_> = s.values().flatten().cloned().collect();
        all.sort();
        assert_eq!(all.len(), 20);
        let p10 = subgroup_partition(&sized([10, 10, 10, 10]), &EV).unwrap();
        let (split, _) = train_test_split(&p10, 0.8, 1).unwrap();
        let Split::Holdout { train, test } = split else { panic!() };
        assert_eq!((train.len(), test.len()), (32, 8));
    }

    #[test]
    fn split_errors() {
        let p = subgroup_partition(&sized([1, 1, 1, 1]), &EV).unwrap();
        assert!(matches!(train_test_split(&p, 0.8, 0), Err(Error::SubgroupTooSmall { size: 1, .. })));
        let p = subgroup_partition(&sized([3, 0, 3, 3]), &EV).unwrap();
        assert!(matches!(balanced_sample(&p, 0), Err(Error::EmptySubgroup(_))));
    }

    #[test]
    fn seeds_control_sampling() {
        let p = subgroup_partition(&sized([400, 500, 300, 200]), &EV).unwrap();
        assert_eq!(balanced_sample(&p, 3).unwrap(), balanced_sample(&p, 3).unwrap());
        assert_ne!(balanced_sample(&p, 3).unwrap(), balanced_sample(&p, 4).unwrap());
    }

    #[test]
    fn cap_examples() {
        let mut exs = Vec::new();
        for i in 0..100 {
            exs.push(ex(i, "lay off", Label::One, None));
        }
        for i in 100..110 {
            exs.push(ex(i, "lay off", Label::Zero, None));
        }
        for i in 110..115 {
            exs.push(ex(i, "other", Label::One, None));
        }
        let c = Corpus::new(exs).unwrap();
        let capped = cap_per_pet(&c, 40, 9);
        let counts = capped.pet_label_counts();
        assert_eq!(counts["lay off"], [10, 40]);
        assert_eq!(counts["other"], [0, 5]);
        assert_eq!(capped, cap_per_pet(&c, 40, 9));
        // retained examples are untouched and in corpus order
        let positions: Vec<usize> = capped.ids().map(|id| id[1..].parse().unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(cap_per_pet(&capped, 40, 1), capped);
    }

    #[test]
    fn kfold_divisible_and_pigeonhole() {
        let c = sized([70, 0, 30, 0]);
        let (split, report) = stratified_kfold(&c, 5, &[SubgroupKey::EuphLabel], 0).unwrap();
        let Split::Folds { folds } = split else { panic!() };
        assert!(folds.iter().all(|f| f.len() == 20));
        let per_fold: Vec<Vec<usize>> = report.iter().map(|r| r.per_split.clone()).collect();
        assert!(per_fold.contains(&vec![14; 5]) && per_fold.contains(&vec![6; 5]));

        let c = sized([71, 0, 30, 0]);
        let (split, _) = stratified_kfold(&c, 5, &[SubgroupKey::EuphLabel], 0).unwrap();
        let Split::Folds { folds } = split else { panic!() };
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        assert_eq!(sizes.iter().sum::<usize>(), 101);
    }

    #[test]
    fn kfold_small_stratum() {
        let c = sized([10, 0, 3, 0]);
        assert!(matches!(
            stratified_kfold(&c, 5, &[SubgroupKey::EuphLabel], 0),
            Err(Error::StratumTooSmall { size: 3, k: 5, .. })
        ));
    }

    #[test]
    fn plan_validation_and_build() {
        let mut p = SplitPlan::balanced_holdout(1);
        p.train_ratio = 1.0;
        assert!(p.validate().is_err());
        let mut p = SplitPlan::stratified_kfold(1);
        p.k = 1;
        assert!(p.validate().is_err());

        let c = sized([40, 60, 30, 20]);
        let d = build_dataset(&c, &SplitPlan::balanced_holdout(2)).unwrap();
        assert_eq!(d.generator, GENERATOR_ID);
        assert_eq!(d.pet_report.splits.len(), 2);
        let runs = d.split.runs();
        assert_eq!(runs.len(), 1);
        assert_eq!(runs[0].0.len(), 64);

        let d = build_dataset(&c, &SplitPlan::stratified_kfold(2)).unwrap();
        assert_eq!(d.split.runs().len(), 5);
        let json = serde_json::to_string(&d).unwrap();
        let back: Dataset = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }
}
