//! Data bundled into the binary for desk-scale runs.

/// 300 labeled Spanish-English tweets, `text<TAB>label<TAB>id`.
pub const ES_EN_300: &str = include_str!("../fixtures/es_en_300.tsv");
pub const LEXICON_ES: &str = include_str!("../fixtures/lexicon_es.txt");
pub const LEXICON_EN: &str = include_str!("../fixtures/lexicon_en.txt");
/// Run configuration sized for [`ES_EN_300`].
pub const PIPELINE_CONFIG: &str = include_str!("../fixtures/pipeline.toml");
