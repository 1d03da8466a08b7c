//! The bundled example models and queries, and loading of `.scm` sources
//! into resolved models.

use std::collections::BTreeMap;

use crate::ctf::Query;
use crate::dsl;
use crate::error::{Error, Result};
use crate::scm::Scm;

pub const FIG2: &str = include_str!("../corpus/fig2.scm");
pub const BARMNIST: &str = include_str!("../corpus/barmnist.scm");
pub const BARMNIST_VARIANT: &str = include_str!("../corpus/barmnist_variant.scm");

/// `(file name, text)` of every bundled file.
pub const BUNDLED: [(&str, &str); 3] = [
    ("fig2.scm", FIG2),
    ("barmnist.scm", BARMNIST),
    ("barmnist_variant.scm", BARMNIST_VARIANT),
];

/// Models and queries from one or more sources. Names are unique across
/// all sources.
#[derive(Debug, Clone)]
pub struct Corpus {
    scms: BTreeMap<String, Scm>,
    queries: BTreeMap<String, Query>,
}

impl Corpus {
    pub fn load<N: AsRef<str>, T: AsRef<str>>(sources: &[(N, T)]) -> Result<Corpus> {
        let mut scms = BTreeMap::new();
        let mut queries = BTreeMap::new();
        let mut origin: BTreeMap<String, String> = BTreeMap::new();
        for (file, text) in sources {
            let file = file.as_ref();
            let parsed = dsl::parse(text.as_ref())
                .map_err(|source| Error::Load { file: file.to_string(), source })?;
            for block in &parsed.blocks {
                if let Some(prev) = origin.insert(block.name().to_string(), file.to_string()) {
                    return Err(Error::Precondition(format!(
                        "block `{}` is defined in both {prev} and {file}",
                        block.name()
                    )));
                }
            }
            for b in parsed.scm_blocks() {
                scms.insert(b.name.clone(), Scm::from_block(b)?);
            }
            for b in parsed.query_blocks() {
                queries.insert(b.name.clone(), Query::from_block(b)?);
            }
        }
        Ok(Corpus { scms, queries })
    }

    pub fn bundled() -> Corpus {
        Corpus::load(&BUNDLED).expect("bundled corpus is valid")
    }

    pub fn scm(&self, name: &str) -> Result<&Scm> {
        self.scms.get(name).ok_or_else(|| Error::UnknownScm(name.to_string()))
    }

    pub fn query(&self, name: &str) -> Result<&Query> {
        self.queries.get(name).ok_or_else(|| Error::UnknownQuery(name.to_string()))
    }

    pub fn scms(&self) -> impl Iterator<Item = &Scm> {
        self.scms.values()
    }

    pub fn queries(&self) -> impl Iterator<Item = &Query> {
        self.queries.values()
    }

    /// The query's model.
    pub fn scm_of(&self, q: &Query) -> Result<&Scm> {
        self.scm(&q.scm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_corpus_loads() {
        let c = Corpus::bundled();
        assert_eq!(c.scms().count(), 9);
        assert_eq!(c.queries().count(), 9);
        assert_eq!(c.scm_of(c.query("q_bar").unwrap()).unwrap().name(), "barmnist_variant");
        assert!(matches!(c.scm("nope"), Err(Error::UnknownScm(_))));
        assert!(matches!(c.query("nope"), Err(Error::UnknownQuery(_))));
    }

    #[test]
    fn names_are_unique_across_files() {
        let dup = [("a.scm", FIG2), ("b.scm", FIG2)];
        assert!(matches!(Corpus::load(&dup), Err(Error::Precondition(_))));
    }

    #[test]
    fn parse_errors_name_the_file() {
        let err = Corpus::load(&[("bad.scm", "scm m { var A = B }")]).unwrap_err();
        assert!(err.to_string().starts_with("bad.scm:1:"), "{err}");
    }
}
