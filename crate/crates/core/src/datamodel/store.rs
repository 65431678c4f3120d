//! File-backed entity store rooted at one data directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::dataset::Dataset;
use super::entities::{content_hash, Experiment, GoldStandard, MatchRecord, MatchingSolution};
use super::import::{read_dataset, read_experiment, read_gold_standard, ImportSpec};
use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::pair::ScoredPair;
use crate::softkpi::{ExperimentKpis, SolutionKpis};

const DATASETS: &str = "datasets";
const EXPERIMENTS: &str = "experiments";
const GOLD: &str = "goldstandards";
const SOLUTIONS: &str = "solutions";

/// Every entity is one JSON file under `<root>/<kind>/<id>.json`, written
/// to a temporary file and renamed into place, so a file is either absent
/// or complete. Lookups accept an id or a unique name.
#[derive(Debug, Default)]
pub struct Store {
    root: Option<PathBuf>,
    datasets: BTreeMap<String, Dataset>,
    experiments: BTreeMap<String, Experiment>,
    gold: BTreeMap<String, GoldStandard>,
    solutions: BTreeMap<String, MatchingSolution>,
}

fn load_dir<T: DeserializeOwned>(dir: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    if !dir.exists() {
        fs::create_dir_all(dir)?;
        return Ok(out);
    }
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let bytes = fs::read(&path)?;
            out.push(serde_json::from_slice(&bytes)?);
        }
    }
    Ok(out)
}

fn find<'a, T>(
    map: &'a BTreeMap<String, T>,
    key: &str,
    name_of: impl Fn(&T) -> &str,
    kind: &'static str,
) -> Result<&'a T> {
    map.get(key)
        .or_else(|| map.values().find(|v| name_of(v) == key))
        .ok_or_else(|| Error::not_found(kind, key))
}

fn fresh_id<T>(prefix: &str, map: &BTreeMap<String, T>) -> String {
    loop {
        let id = format!("{prefix}-{}", &uuid::Uuid::new_v4().simple().to_string()[..10]);
        if !map.contains_key(&id) {
            return id;
        }
    }
}

impl Store {
    pub fn in_memory() -> Self {
        Store::default()
    }

    /// Opens (creating if needed) the store under `root` and loads every entity.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        let mut store = Store {
            root: Some(root.clone()),
            ..Store::default()
        };
        for d in load_dir::<Dataset>(&root.join(DATASETS))? {
            store.datasets.insert(d.id.clone(), d);
        }
        for e in load_dir::<Experiment>(&root.join(EXPERIMENTS))? {
            store.experiments.insert(e.id.clone(), e);
        }
        for g in load_dir::<GoldStandard>(&root.join(GOLD))? {
            store.gold.insert(g.id.clone(), g);
        }
        for s in load_dir::<MatchingSolution>(&root.join(SOLUTIONS))? {
            store.solutions.insert(s.id.clone(), s);
        }
        Ok(store)
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    fn persist<T: Serialize>(&self, kind: &str, id: &str, value: &T) -> Result<()> {
        let Some(root) = &self.root else {
            return Ok(());
        };
        let dir = root.join(kind);
        fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        serde_json::to_writer(&mut tmp, value)?;
        tmp.flush()?;
        tmp.persist(dir.join(format!("{id}.json")))
            .map_err(|e| Error::Io(e.error))?;
        Ok(())
    }

    fn unpersist(&self, kind: &str, id: &str) -> Result<()> {
        if let Some(root) = &self.root {
            let path = root.join(kind).join(format!("{id}.json"));
            if path.exists() {
                fs::remove_file(path)?;
            }
        }
        Ok(())
    }

    // ---- datasets ----

    pub fn datasets(&self) -> impl Iterator<Item = &Dataset> {
        self.datasets.values()
    }

    pub fn dataset(&self, key: &str) -> Result<&Dataset> {
        find(&self.datasets, key, |d| &d.name, "dataset")
    }

    pub fn import_dataset(&mut self, name: &str, input: impl Read, spec: &ImportSpec) -> Result<&Dataset> {
        if self.datasets.values().any(|d| d.name == name) {
            return Err(Error::Conflict(format!("dataset `{name}` already exists")));
        }
        let id = fresh_id("ds", &self.datasets);
        let dataset = read_dataset(input, spec, id.clone(), name.to_owned())?;
        self.persist(DATASETS, &id, &dataset)?;
        Ok(self.datasets.entry(id).or_insert(dataset))
    }

    pub fn export_dataset(&self, key: &str, output: impl Write, id_column: &str, separator: u8) -> Result<()> {
        self.dataset(key)?.write_csv(output, id_column, separator)
    }

    /// Deletes the dataset with its experiments and gold standards.
    pub fn delete_dataset(&mut self, key: &str) -> Result<()> {
        let id = self.dataset(key)?.id.clone();
        let experiments: Vec<String> = self
            .experiments
            .values()
            .filter(|e| e.dataset_id == id)
            .map(|e| e.id.clone())
            .collect();
        for e in experiments {
            self.delete_experiment(&e)?;
        }
        let gold: Vec<String> = self
            .gold
            .values()
            .filter(|g| g.dataset_id == id)
            .map(|g| g.id.clone())
            .collect();
        for g in gold {
            self.delete_gold_standard(&g)?;
        }
        self.unpersist(DATASETS, &id)?;
        self.datasets.remove(&id);
        Ok(())
    }

    // ---- gold standards ----

    pub fn gold_standards(&self) -> impl Iterator<Item = &GoldStandard> {
        self.gold.values()
    }

    pub fn gold_standard(&self, key: &str) -> Result<&GoldStandard> {
        find(&self.gold, key, |g| &g.name, "gold standard")
    }

    pub fn import_gold_standard(
        &mut self,
        dataset_key: &str,
        name: &str,
        input: impl Read,
        spec: &ImportSpec,
    ) -> Result<&GoldStandard> {
        let dataset = self.dataset(dataset_key)?;
        let clustering = read_gold_standard(input, spec, dataset)?;
        let dataset_id = dataset.id.clone();
        self.insert_gold_standard(&dataset_id, name, clustering)
    }

    pub fn insert_gold_standard(
        &mut self,
        dataset_key: &str,
        name: &str,
        clustering: Clustering,
    ) -> Result<&GoldStandard> {
        let dataset = self.dataset(dataset_key)?;
        if clustering.len() != dataset.len() {
            return Err(Error::UniverseMismatch {
                left: dataset.len(),
                right: clustering.len(),
            });
        }
        if self.gold.values().any(|g| g.name == name) {
            return Err(Error::Conflict(format!("gold standard `{name}` already exists")));
        }
        let clustering = clustering.canonical();
        let gold = GoldStandard {
            id: fresh_id("gs", &self.gold),
            name: name.to_owned(),
            dataset_id: dataset.id.clone(),
            content_hash: content_hash(&clustering),
            clustering,
        };
        self.persist(GOLD, &gold.id, &gold)?;
        let id = gold.id.clone();
        Ok(self.gold.entry(id).or_insert(gold))
    }

    pub fn delete_gold_standard(&mut self, key: &str) -> Result<()> {
        let id = self.gold_standard(key)?.id.clone();
        self.unpersist(GOLD, &id)?;
        self.gold.remove(&id);
        Ok(())
    }

    // ---- experiments ----

    pub fn experiments(&self) -> impl Iterator<Item = &Experiment> {
        self.experiments.values()
    }

    pub fn experiment(&self, key: &str) -> Result<&Experiment> {
        find(&self.experiments, key, |e| &e.name, "experiment")
    }

    pub fn import_experiment(
        &mut self,
        dataset_key: &str,
        name: &str,
        solution_key: Option<&str>,
        input: impl Read,
        spec: &ImportSpec,
    ) -> Result<&Experiment> {
        let dataset = self.dataset(dataset_key)?;
        let matches = read_experiment(input, spec, dataset)?;
        let dataset_id = dataset.id.clone();
        self.insert_experiment(&dataset_id, name, solution_key, matches)
    }

    /// Stores already-resolved matches; every match is marked original.
    pub fn insert_experiment(
        &mut self,
        dataset_key: &str,
        name: &str,
        solution_key: Option<&str>,
        matches: Vec<ScoredPair>,
    ) -> Result<&Experiment> {
        let dataset = self.dataset(dataset_key)?;
        if let Some(bad) = matches.iter().find(|m| m.pair.high() >= dataset.len()) {
            return Err(Error::UnknownRecordId(bad.pair.high().to_string()));
        }
        if let Some(bad) = matches.iter().find_map(|m| m.similarity.filter(|s| !s.is_finite())) {
            return Err(Error::Value(format!("similarity {bad} is not finite")));
        }
        let solution_id = solution_key
            .map(|k| self.solution(k).map(|s| s.id.clone()))
            .transpose()?;
        if self.experiments.values().any(|e| e.name == name) {
            return Err(Error::Conflict(format!("experiment `{name}` already exists")));
        }
        let matches: Vec<MatchRecord> = matches
            .into_iter()
            .map(|m| MatchRecord {
                pair: m.pair,
                similarity: m.similarity,
                is_original: true,
            })
            .collect();
        let experiment = Experiment {
            id: fresh_id("ex", &self.experiments),
            name: name.to_owned(),
            dataset_id: dataset.id.clone(),
            solution_id,
            content_hash: content_hash(&matches),
            matches,
            soft_kpis: None,
        };
        self.persist(EXPERIMENTS, &experiment.id, &experiment)?;
        let id = experiment.id.clone();
        Ok(self.experiments.entry(id).or_insert(experiment))
    }

    pub fn set_experiment_kpis(&mut self, key: &str, kpis: ExperimentKpis) -> Result<&Experiment> {
        kpis.validate()?;
        let id = self.experiment(key)?.id.clone();
        let mut updated = self.experiments[&id].clone();
        updated.soft_kpis = Some(kpis);
        self.persist(EXPERIMENTS, &id, &updated)?;
        self.experiments.insert(id.clone(), updated);
        Ok(&self.experiments[&id])
    }

    pub fn delete_experiment(&mut self, key: &str) -> Result<()> {
        let id = self.experiment(key)?.id.clone();
        self.unpersist(EXPERIMENTS, &id)?;
        self.experiments.remove(&id);
        Ok(())
    }

    // ---- solutions ----

    pub fn solutions(&self) -> impl Iterator<Item = &MatchingSolution> {
        self.solutions.values()
    }

    pub fn solution(&self, key: &str) -> Result<&MatchingSolution> {
        find(&self.solutions, key, |s| &s.name, "solution")
    }

    pub fn create_solution(&mut self, name: &str, kpis: SolutionKpis) -> Result<&MatchingSolution> {
        kpis.validate()?;
        if self.solutions.values().any(|s| s.name == name) {
            return Err(Error::Conflict(format!("solution `{name}` already exists")));
        }
        let solution = MatchingSolution {
            id: fresh_id("so", &self.solutions),
            name: name.to_owned(),
            soft_kpis: kpis,
        };
        self.persist(SOLUTIONS, &solution.id, &solution)?;
        let id = solution.id.clone();
        Ok(self.solutions.entry(id).or_insert(solution))
    }

    pub fn update_solution_kpis(&mut self, key: &str, kpis: SolutionKpis) -> Result<&MatchingSolution> {
        kpis.validate()?;
        let id = self.solution(key)?.id.clone();
        let mut updated = self.solutions[&id].clone();
        updated.soft_kpis = kpis;
        self.persist(SOLUTIONS, &id, &updated)?;
        self.solutions.insert(id.clone(), updated);
        Ok(&self.solutions[&id])
    }

    /// Deletes the solution; its experiments are kept but unlinked.
    pub fn delete_solution(&mut self, key: &str) -> Result<()> {
        let id = self.solution(key)?.id.clone();
        let linked: Vec<String> = self
            .experiments
            .values()
            .filter(|e| e.solution_id.as_deref() == Some(&id))
            .map(|e| e.id.clone())
            .collect();
        for e in linked {
            let mut updated = self.experiments[&e].clone();
            updated.solution_id = None;
            self.persist(EXPERIMENTS, &e, &updated)?;
            self.experiments.insert(e, updated);
        }
        self.unpersist(SOLUTIONS, &id)?;
        self.solutions.remove(&id);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DATA: &str = "id,title\na,x\nb,y\nc,z\nd,w\n";

    fn seeded(store: &mut Store) {
        store.import_dataset("abcd", DATA.as_bytes(), &ImportSpec::dataset("id")).unwrap();
        store
            .import_gold_standard("abcd", "truth", "p1,p2\na,b\nc,d\n".as_bytes(), &ImportSpec::gold_pairs("p1", "p2"))
            .unwrap();
        store
            .import_experiment(
                "abcd",
                "run",
                None,
                "p1,p2,sim\na,c,0.9\nb,d,0.8\na,b,0.7\n".as_bytes(),
                &ImportSpec::experiment("p1", "p2", Some("sim")),
            )
            .unwrap();
    }

    #[test]
    fn create_get_delete() {
        let mut store = Store::in_memory();
        seeded(&mut store);
        let id = store.dataset("abcd").unwrap().id.clone();
        assert_eq!(store.dataset(&id).unwrap().len(), 4);
        assert_eq!(store.experiment("run").unwrap().matches.len(), 3);
        store.delete_experiment("run").unwrap();
        assert!(matches!(store.experiment("run"), Err(Error::NotFound { .. })));
    }

    #[test]
    fn cascade_delete_leaves_no_orphans() {
        let mut store = Store::in_memory();
        seeded(&mut store);
        store.delete_dataset("abcd").unwrap();
        assert_eq!(store.experiments().count(), 0);
        assert_eq!(store.gold_standards().count(), 0);
        assert!(store.dataset("abcd").is_err());
    }

    #[test]
    fn duplicate_names_conflict() {
        let mut store = Store::in_memory();
        seeded(&mut store);
        let again = store.import_dataset("abcd", DATA.as_bytes(), &ImportSpec::dataset("id"));
        assert!(matches!(again, Err(Error::Conflict(_))));
    }

    #[test]
    fn failed_import_leaves_nothing_behind() {
        let mut store = Store::in_memory();
        let bad = store.import_dataset("bad", "id,v\na,1\na,2\n".as_bytes(), &ImportSpec::dataset("id"));
        assert!(bad.is_err());
        assert_eq!(store.datasets().count(), 0);
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let (dataset, experiment) = {
            let mut store = Store::open(dir.path()).unwrap();
            seeded(&mut store);
            store.create_solution("magellan", SolutionKpis::default()).unwrap();
            (
                store.dataset("abcd").unwrap().clone(),
                store.experiment("run").unwrap().clone(),
            )
        };
        let store = Store::open(dir.path()).unwrap();
        assert_eq!(store.dataset("abcd").unwrap(), &dataset);
        assert_eq!(store.dataset("abcd").unwrap().dense_id("c"), Some(2));
        assert_eq!(store.experiment("run").unwrap(), &experiment);
        assert_eq!(store.gold_standard("truth").unwrap().clustering.total_pairs(), 2);
        assert!(store.solution("magellan").is_ok());
    }

    #[test]
    fn export_round_trips_records() {
        let mut store = Store::in_memory();
        let csv = "id,title,year\n1,\"a, quoted\",\n2,plain,1999\n";
        store.import_dataset("q", csv.as_bytes(), &ImportSpec::dataset("id")).unwrap();
        let mut out = Vec::new();
        store.export_dataset("q", &mut out, "id", b',').unwrap();
        let mut again = Store::in_memory();
        again.import_dataset("q", out.as_slice(), &ImportSpec::dataset("id")).unwrap();
        let (a, b) = (store.dataset("q").unwrap(), again.dataset("q").unwrap());
        assert_eq!(a.rows().collect::<Vec<_>>(), b.rows().collect::<Vec<_>>());
        assert_eq!(a.attribute_names(), b.attribute_names());
    }

    #[test]
    fn deleting_solution_unlinks_experiments() {
        let mut store = Store::in_memory();
        store.import_dataset("abcd", DATA.as_bytes(), &ImportSpec::dataset("id")).unwrap();
        store.create_solution("s", SolutionKpis::default()).unwrap();
        store.insert_experiment("abcd", "e", Some("s"), Vec::new()).unwrap();
        assert!(store.experiment("e").unwrap().solution_id.is_some());
        store.delete_solution("s").unwrap();
        assert_eq!(store.experiment("e").unwrap().solution_id, None);
    }
}
