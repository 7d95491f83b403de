//! Deterministic synthetic review archives used as test fixtures.
//!
//! Every generator is a pure function of its seed, so the JSONL files under
//! `fixtures/` can be regenerated and compared byte for byte.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ingest::{DiffLine, FileDiff, LineOp, PatchRevision, ReviewRecord, ReviewStatus};

pub const DEFAULT_SEED: u64 = 20150301;

fn day(i: usize) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2015, 3, 1, 9, 0, 0).unwrap() + Duration::hours(7 * i as i64)
}

/// A diff whose pre side is `base` and post side is `base` with `inserted`
/// spliced in at line `at`.
fn insertion(path: &str, base: &[String], at: usize, inserted: &[String]) -> FileDiff {
    let at = at.min(base.len());
    let mut lines: Vec<DiffLine> = base[..at].iter().map(|l| DiffLine::new(LineOp::Unchanged, l.clone())).collect();
    lines.extend(inserted.iter().map(|l| DiffLine::new(LineOp::Added, l.clone())));
    lines.extend(base[at..].iter().map(|l| DiffLine::new(LineOp::Unchanged, l.clone())));
    FileDiff::new(path, lines)
}

/// A diff replacing `removed` lines by `added` lines between shared context.
fn replacement(path: &str, before: &[String], removed: &[String], added: &[String], after: &[String]) -> FileDiff {
    let mut lines: Vec<DiffLine> = before.iter().map(|l| DiffLine::new(LineOp::Unchanged, l.clone())).collect();
    lines.extend(removed.iter().map(|l| DiffLine::new(LineOp::Removed, l.clone())));
    lines.extend(added.iter().map(|l| DiffLine::new(LineOp::Added, l.clone())));
    lines.extend(after.iter().map(|l| DiffLine::new(LineOp::Unchanged, l.clone())));
    FileDiff::new(path, lines)
}

fn new_file(path: &str, content: &[String]) -> FileDiff {
    FileDiff::new(path, content.iter().map(|l| DiffLine::new(LineOp::Added, l.clone())).collect())
}

fn record(id: String, status: ReviewStatus, start: usize, revisions: Vec<Vec<FileDiff>>) -> ReviewRecord {
    let revisions = revisions
        .into_iter()
        .enumerate()
        .map(|(i, files)| PatchRevision {
            revision_number: i as u32 + 1,
            created: day(start) + Duration::minutes(30 * i as i64),
            files,
        })
        .collect();
    ReviewRecord::new(id, status, revisions).expect("generated records are valid")
}

fn lines(text: &str) -> Vec<String> {
    text.lines().map(str::to_string).collect()
}

/// Python snippets with `{0}`, `{1}`, ... identifier slots.
const PY_TEMPLATES: &[&str] = &[
    "def {0}(self, {1}):\n    return self.{2}.get({1})\n",
    "for {0} in self.{1}:\n    {2}.append({0})\n",
    "if {0} is None:\n    raise ValueError({1})\n",
    "{0} = self.{1}.{2}()\n",
    "try:\n    {0} = {1}({2})\nexcept KeyError:\n    {0} = None\n",
    "def {0}(self):\n    self.{1} = {2}\n",
    "{0} = [{1} for {1} in {2} if {1}]\n",
    "LOG.debug({0}, {1})\n",
];

/// Idiomatic slot fillers shared by every post-review version.
const PY_IDIOMS: &[&[&str]] = &[
    &["get_item", "key", "items"],
    &["item", "items", "result"],
    &["value", "msg"],
    &["result", "client", "list"],
    &["result", "parse", "data"],
    &["reset", "items", "None"],
    &["names", "name", "names"],
    &["msg", "value"],
];

const SH_TEMPLATES: &[&str] = &[
    "if [ -z \"${0}\" ]; then\n    echo \"{1}\"\n    exit 1\nfi\n",
    "for {0} in ${1}; do\n    {2} \"${0}\"\ndone\n",
    "{0}=$({1} {2})\n",
    "export {0}=\"${1}/{2}\"\n",
];

const SH_IDIOMS: &[&[&str]] =
    &[&["HOST", "missing", "host"], &["f", "FILES", "install_file"], &["OUT", "cat", "file"], &["PATH", "HOME", "bin"]];

fn fill(template: &str, slots: &[String]) -> String {
    let mut s = template.to_string();
    for (i, v) in slots.iter().enumerate() {
        s = s.replace(&format!("{{{i}}}"), v);
    }
    s
}

fn idiom(templates: &[&str], idioms: &[&[&str]], t: usize) -> String {
    fill(templates[t], &idioms[t].iter().map(|s| s.to_string()).collect::<Vec<_>>())
}

fn fresh(templates: &[&str], idioms: &[&[&str]], t: usize, tag: &str) -> String {
    let slots: Vec<String> = (0..idioms[t].len()).map(|i| format!("{tag}x{i}")).collect();
    fill(templates[t], &slots)
}

/// Ten accepted reviews. Each inserts a block into a shared base file; the
/// first revision's block uses identifiers unique to the review, the final
/// revision's block uses the project's shared idioms.
pub fn rq1_fixture(seed: u64) -> Vec<ReviewRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let py_base = lines(&(0..PY_TEMPLATES.len()).map(|t| idiom(PY_TEMPLATES, PY_IDIOMS, t)).collect::<String>());
    let sh_base = lines(&(0..SH_TEMPLATES.len()).map(|t| idiom(SH_TEMPLATES, SH_IDIOMS, t)).collect::<String>());
    (0..10)
        .map(|r| {
            let mut pre_py = String::new();
            let mut post_py = String::new();
            for j in 0..rng.gen_range(3..6) {
                let t = rng.gen_range(0..PY_TEMPLATES.len());
                pre_py += &fresh(PY_TEMPLATES, PY_IDIOMS, t, &format!("tmp{r}n{j}"));
                post_py += &idiom(PY_TEMPLATES, PY_IDIOMS, t);
            }
            let mut pre_sh = String::new();
            let mut post_sh = String::new();
            for j in 0..rng.gen_range(2..4) {
                let t = rng.gen_range(0..SH_TEMPLATES.len());
                pre_sh += &fresh(SH_TEMPLATES, SH_IDIOMS, t, &format!("V{r}N{j}"));
                post_sh += &idiom(SH_TEMPLATES, SH_IDIOMS, t);
            }
            let at_py = rng.gen_range(0..=py_base.len());
            let at_sh = rng.gen_range(0..=sh_base.len());
            let module = format!("nova/compute/mod{r}.py");
            let script = format!("tools/setup{r}.sh");
            let first = vec![
                insertion(&module, &py_base, at_py, &lines(&pre_py)),
                insertion(&script, &sh_base, at_sh, &lines(&pre_sh)),
            ];
            let last = vec![
                insertion(&module, &py_base, at_py, &lines(&post_py)),
                insertion(&script, &sh_base, at_sh, &lines(&post_sh)),
            ];
            record(format!("I{:04x}", 0x1000 + r), ReviewStatus::Accepted, r, vec![first, last])
        })
        .collect()
}

/// Python in a style foreign to [`PY_TEMPLATES`].
const FOREIGN_PY: &[&str] = &[
    "with {0} as {1}:\n    yield {1} ** {2}\n",
    "{0} = lambda {1}: {1} @ {2}\n",
    "while not {0}:\n    {1} //= {2}\n",
    "assert {0} >= {1}, {2}\n",
    "global {0}\n{0} |= {1} ^ {2}\n",
];

const FOREIGN_NAMES: &[&str] = &["zeta", "omega", "kappa", "sigma", "theta", "lambda_", "rho", "tau"];

/// Fifteen reviews: twelve accepted ones written with the project's idioms
/// and three abandoned ones written in a disjoint style.
pub fn rq2_fixture(seed: u64) -> Vec<ReviewRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for r in 0..15 {
        let abandoned = r % 5 == 4;
        let mut body = String::new();
        for _ in 0..rng.gen_range(4..8) {
            if abandoned {
                let t = FOREIGN_PY.choose(&mut rng).unwrap();
                let slots: Vec<String> = (0..3).map(|_| FOREIGN_NAMES.choose(&mut rng).unwrap().to_string()).collect();
                body += &fill(t, &slots);
            } else {
                body += &idiom(PY_TEMPLATES, PY_IDIOMS, rng.gen_range(0..PY_TEMPLATES.len()));
            }
        }
        let status = if abandoned { ReviewStatus::Abandoned } else { ReviewStatus::Accepted };
        let diff = new_file(&format!("neutron/agent/part{r}.py"), &lines(&body));
        out.push(record(format!("I{:04x}", 0x2000 + r), status, r, vec![vec![diff]]));
    }
    out
}

/// The 10-rule cyclic grammar: rule `i` always follows rule `i - 1`.
/// Programs start at rule 0 and stop after whole cycles.
fn cyclic_program(start: usize, rules: usize) -> String {
    (0..rules)
        .map(|j| {
            let i = (start + j) % 10;
            let prev = (i + 9) % 10;
            match i % 3 {
                0 => format!("v{i} = step(v{prev})\n"),
                1 => format!("if v{prev}:\n    v{i} = v{prev} + 1\n"),
                _ => format!("v{i} = [v{prev}, v{prev}]\n"),
            }
        })
        .collect()
}

fn doc_words() -> Vec<String> {
    let stems = ["install", "config", "service", "node", "network", "volume", "image", "user", "token", "quota"];
    let suffixes = [
        "", "s", "ed", "ing", "er", "al", "ly", "ion", "ment", "able", "ity", "ize", "ure", "ant", "ive", "ous",
        "ward", "ship", "hood", "let",
    ];
    stems.iter().flat_map(|s| suffixes.iter().map(move |x| format!("{s}{x}"))).collect()
}

/// Twelve accepted reviews with programming files from a deterministic
/// grammar, documentation files of random words drawn from a 200-word
/// vocabulary and small configuration files.
pub fn pq2_fixture(seed: u64) -> Vec<ReviewRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = doc_words();
    debug_assert_eq!(words.len(), 200);
    (0..12)
        .map(|r| {
            let mut files = Vec::new();
            for f in 0..rng.gen_range(1..3) {
                let prog = cyclic_program(0, 10 * rng.gen_range(2..5));
                files.push(new_file(&format!("cinder/volume/drv{r}_{f}.py"), &lines(&prog)));
            }
            for f in 0..rng.gen_range(1..3) {
                let text: Vec<String> = (0..rng.gen_range(8..16))
                    .map(|_| {
                        (0..rng.gen_range(6..12))
                            .map(|_| words.choose(&mut rng).unwrap().as_str())
                            .collect::<Vec<_>>()
                            .join(" ")
                    })
                    .collect();
                files.push(new_file(&format!("doc/source/page{r}_{f}.rst"), &text));
            }
            let conf: Vec<String> =
                (0..rng.gen_range(3..6)).map(|i| format!("opt_{}: {}", words.choose(&mut rng).unwrap(), i)).collect();
            files.push(new_file(&format!("etc/conf{r}.yaml"), &conf));
            record(format!("I{:04x}", 0x3000 + r), ReviewStatus::Accepted, r, vec![files])
        })
        .collect()
}

/// Line churn per file: `(path, added, removed)`.
pub type ChurnSpec = &'static [(&'static str, usize, usize)];

/// Twelve reviews with hand-specified churn; revisions are listed per review.
pub const PQ1_CHURN: [&[ChurnSpec]; 12] = [
    &[&[("a.py", 10, 2), ("setup.cfg", 1, 0)]],
    &[&[("b.py", 4, 4)], &[("b.py", 2, 0), ("README.rst", 3, 1)]],
    &[&[("deploy.yaml", 6, 0), ("c.py", 2, 0)]],
    &[&[("index.html", 5, 5)]],
    &[&[("d.sh", 8, 0), ("conf.json", 0, 2)]],
    &[&[("e.js", 3, 3), ("notes.txt", 2, 0), ("logo.png", 9, 0)]],
    &[&[("f.py", 20, 0)], &[("f.py", 5, 5)], &[("f.py", 0, 1)]],
    &[&[("site.pp", 4, 0), ("g.py", 1, 1), ("guide.rst", 1, 0)]],
    &[&[("h.py", 7, 0), ("api.php", 1, 0)]],
    &[&[("layout.xml", 2, 2)]],
    &[&[("i.py", 3, 0), ("j.js", 3, 0), ("k.yml", 2, 0)]],
    &[&[("Makefile", 4, 0)]],
];

/// Twelve reviews whose churn follows [`PQ1_CHURN`].
pub fn pq1_fixture() -> Vec<ReviewRecord> {
    PQ1_CHURN
        .iter()
        .enumerate()
        .map(|(r, revisions)| {
            let revisions = revisions
                .iter()
                .map(|files| {
                    files
                        .iter()
                        .map(|(path, added, removed)| {
                            let old: Vec<String> = (0..*removed).map(|i| format!("old {i}")).collect();
                            let new: Vec<String> = (0..*added).map(|i| format!("new {i}")).collect();
                            replacement(path, &lines("header"), &old, &new, &[])
                        })
                        .collect()
                })
                .collect();
            let status = if r % 4 == 3 { ReviewStatus::Abandoned } else { ReviewStatus::Accepted };
            record(format!("I{:04x}", 0x4000 + r), status, r, revisions)
        })
        .collect()
}
