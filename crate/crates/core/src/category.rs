use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Object categories of the tabletop benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bottle,
    Bowl,
    Camera,
    Can,
    Laptop,
    Mug,
}

impl Category {
    pub const ALL: [Category; 6] =
        [Category::Bottle, Category::Bowl, Category::Camera, Category::Can, Category::Laptop, Category::Mug];

    pub fn name(self) -> &'static str {
        match self {
            Category::Bottle => "bottle",
            Category::Bowl => "bowl",
            Category::Camera => "camera",
            Category::Can => "can",
            Category::Laptop => "laptop",
            Category::Mug => "mug",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Category::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}
