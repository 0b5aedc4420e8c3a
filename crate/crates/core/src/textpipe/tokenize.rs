use serde::{Deserialize, Serialize};

/// Word tokenizer splitting on whitespace, `\r \n \t . , ; : ' " ( ) ? !`,
/// and every other non-alphanumeric character. Letters outside ASCII count
/// as word characters, so accented names stay whole.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub lowercase: bool,
    /// When false, `'` is kept inside words ("didn't" stays one token).
    pub split_apostrophes: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer {
            lowercase: true,
            split_apostrophes: true,
        }
    }
}

impl Tokenizer {
    pub fn is_delimiter(&self, c: char) -> bool {
        if c == '\'' {
            return self.split_apostrophes;
        }
        !c.is_alphanumeric()
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        // case folding first: lowercasing can emit combining marks, which are delimiters
        if self.lowercase {
            self.fragments(&text.to_lowercase()).map(str::to_string).collect()
        } else {
            self.fragments(text).map(str::to_string).collect()
        }
    }

    pub fn count(&self, text: &str) -> usize {
        if self.lowercase {
            self.fragments(&text.to_lowercase()).count()
        } else {
            self.fragments(text).count()
        }
    }

    fn fragments<'a>(&'a self, text: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        text.split(|c| self.is_delimiter(c))
            .map(|t| if self.split_apostrophes { t } else { t.trim_matches('\'') })
            .filter(|t| !t.is_empty())
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}
