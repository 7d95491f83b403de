use std::fmt;

use serde::{Deserialize, Serialize};

/// Role of a file in a project, decided by its extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Programming,
    Configuration,
    Documentation,
    Other,
}

const CONFIGURATION: &[&str] = &[".yml", ".json", ".xml", ".pp", ".yaml"];
const PROGRAMMING: &[&str] = &[".sh", ".py", ".js"];
const DOCUMENTATION: &[&str] = &[".rst", ".php", ".html", ".txt"];

impl FileKind {
    /// The three kinds that take part in the file-kind analyses.
    pub const ANALYZED: [FileKind; 3] = [FileKind::Programming, FileKind::Configuration, FileKind::Documentation];

    pub fn extensions(self) -> &'static [&'static str] {
        match self {
            FileKind::Programming => PROGRAMMING,
            FileKind::Configuration => CONFIGURATION,
            FileKind::Documentation => DOCUMENTATION,
            FileKind::Other => &[],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FileKind::Programming => "programming",
            FileKind::Configuration => "configuration",
            FileKind::Documentation => "documentation",
            FileKind::Other => "other",
        }
    }
}

impl fmt::Display for FileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "programming" | "prog" => Ok(FileKind::Programming),
            "configuration" | "conf" => Ok(FileKind::Configuration),
            "documentation" | "doc" => Ok(FileKind::Documentation),
            "other" => Ok(FileKind::Other),
            other => Err(format!("unknown file kind {other:?}")),
        }
    }
}

/// Lower-cased extension including the dot, e.g. `".py"`. Dotfiles such as
/// `.gitignore` have no extension.
pub fn extension_of(path: &str) -> Option<String> {
    let name = path.rsplit(['/', '\\']).next().unwrap_or(path);
    let dot = name.rfind('.')?;
    if dot == 0 || dot + 1 == name.len() {
        return None;
    }
    Some(name[dot..].to_lowercase())
}

pub fn classify_file(path: &str) -> FileKind {
    let Some(ext) = extension_of(path) else {
        return FileKind::Other;
    };
    [FileKind::Configuration, FileKind::Programming, FileKind::Documentation]
        .into_iter()
        .find(|k| k.extensions().contains(&ext.as_str()))
        .unwrap_or(FileKind::Other)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_by_extension() {
        assert_eq!(classify_file("a/b.py"), FileKind::Programming);
        assert_eq!(classify_file("conf/x.yaml"), FileKind::Configuration);
        assert_eq!(classify_file("Makefile"), FileKind::Other);
        assert_eq!(classify_file("docs/INDEX.RST"), FileKind::Documentation);
        assert_eq!(classify_file("manifests/init.pp"), FileKind::Configuration);
        assert_eq!(classify_file("www/page.php"), FileKind::Documentation);
        assert_eq!(classify_file("tools/run.sh"), FileKind::Programming);
        assert_eq!(classify_file("a.tar.gz"), FileKind::Other);
        assert_eq!(classify_file(".gitignore"), FileKind::Other);
        assert_eq!(classify_file("dir.d/file"), FileKind::Other);
    }

    #[test]
    fn extension_parsing() {
        assert_eq!(extension_of("x/y.Py").as_deref(), Some(".py"));
        assert_eq!(extension_of("trailing."), None);
        assert_eq!(extension_of("noext"), None);
    }
}
