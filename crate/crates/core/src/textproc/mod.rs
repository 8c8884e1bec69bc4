//! Offset-preserving tokenization and sentence units, plus the BIO tag codec.

mod bio;
mod conll;
mod sentences;
mod tokenize;

pub use bio::{
    decode_bio, encode_bio, BioSpan, BioTag, Decoded, Encoded, LabelScheme, TagParseError,
    TaggedSequence, DRUG_TAG_LABEL,
};
pub use conll::{
    export_conll, parse_conll, write_conll, ConllBlock, ConllError, ConllRow, ExportStats,
};
pub use sentences::{split_sentences, SentenceUnit};
pub use tokenize::{tokenize, Token};
