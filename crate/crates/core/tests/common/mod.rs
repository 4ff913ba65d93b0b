//! Test fixtures: template sentence banks for held-out language-id data and
//! a seeded generator of pseudo-bilingual document pairs with known
//! document pairing and sentence alignment.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EN_SUBJECTS: &[&str] = &[
    "The Minister for Health",
    "The Health Service Executive",
    "A spokesperson for the hospital",
    "The national screening programme",
    "Public health doctors",
    "The chief medical officer",
    "Nursing staff in the region",
    "The independent review group",
    "Local general practitioners",
    "The patient advocacy service",
];
const EN_VERBS: &[&str] = &[
    "announced new funding for",
    "published a detailed report on",
    "expressed serious concern about",
    "has launched a campaign on",
    "will review the arrangements for",
    "is considering changes to",
    "welcomed the progress made on",
    "called for urgent action on",
];
const EN_OBJECTS: &[&str] = &[
    "mental health services",
    "cancer screening",
    "the vaccination of older people",
    "waiting lists for surgery",
    "the care of young children",
    "emergency departments",
    "community nursing",
    "dental treatment for families",
];
const EN_TAILS: &[&str] = &[
    "this week",
    "in the coming months",
    "across the country",
    "in rural areas",
    "before the end of the year",
    "following a public consultation",
];

const GA_AUX: &[&str] = &["Tá", "Bhí", "Beidh", "Níl", "Ní raibh", "Ní bheidh"];
const GA_SUBJECTS: &[&str] = &[
    "an tAire Sláinte",
    "Feidhmeannacht na Seirbhíse Sláinte",
    "an t-ospidéal réigiúnach",
    "na dochtúirí sláinte poiblí",
    "an príomhoifigeach leighis",
    "foireann an ospidéil",
    "an grúpa athbhreithnithe neamhspleách",
    "na dochtúirí teaghlaigh áitiúla",
    "an Roinn Sláinte",
    "urlabhraí ón ospidéal",
];
const GA_ACTIVITIES: &[&str] = &[
    "ag obair ar phlean nua do sheirbhísí meabhairshláinte",
    "ag plé na liostaí feithimh le haghaidh obráidí",
    "ag ullmhú tuarascála faoi scagthástáil ailse",
    "ag cur maoinithe ar fáil do ranna éigeandála",
    "ag déanamh athbhreithnithe ar chúram leanaí óga",
    "ag iarraidh tuilleadh altraí pobail a earcú",
    "ag feabhsú na seirbhísí fiaclóireachta do theaghlaigh",
    "ag eagrú feachtais vacsaínithe do dhaoine scothaosta",
];
const GA_TAILS: &[&str] = &[
    "an tseachtain seo",
    "sna míonna atá romhainn",
    "ar fud na tíre",
    "i gceantair thuaithe",
    "roimh dheireadh na bliana",
    "tar éis comhairliúcháin phoiblí",
];

fn pick<'a>(rng: &mut ChaCha8Rng, bank: &[&'a str]) -> &'a str {
    bank.choose(rng).expect("non-empty bank")
}

/// One English sentence without the final full stop.
fn english_clause(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {} {}",
        pick(rng, EN_SUBJECTS),
        pick(rng, EN_VERBS),
        pick(rng, EN_OBJECTS),
        pick(rng, EN_TAILS)
    )
}

/// One Irish sentence without the final full stop.
fn irish_clause(rng: &mut ChaCha8Rng) -> String {
    format!(
        "{} {} {} {}",
        pick(rng, GA_AUX),
        pick(rng, GA_SUBJECTS),
        pick(rng, GA_ACTIVITIES),
        pick(rng, GA_TAILS)
    )
}

fn clause(lang: &str, rng: &mut ChaCha8Rng) -> String {
    match lang {
        "en" => english_clause(rng),
        "ga" => irish_clause(rng),
        _ => panic!("no sentence bank for {lang}"),
    }
}

/// `n` distinct sentences of at least 40 characters.
pub fn held_out_sentences(lang: &str, n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        assert!(
            attempts < n * 50,
            "sentence bank for {lang} too small for {n} sentences"
        );
        let s = format!("{}.", clause(lang, &mut rng));
        if s.chars().count() >= 40 && seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Irish clause whose length is closest to `target` out of a few draws.
fn irish_clause_near(rng: &mut ChaCha8Rng, target: usize) -> String {
    (0..40)
        .map(|_| irish_clause(rng))
        .min_by_key(|c| char_len(c).abs_diff(target))
        .expect("draws")
}

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

const PLACES: &[&str] = &[
    "Carrowkeel",
    "Drumlish",
    "Ballinagh",
    "Kilmeedy",
    "Tullyvin",
    "Rathowen",
    "Cloonfad",
    "Moyvore",
    "Glenamoy",
    "Ardfinnan",
    "Lisdowney",
    "Curraglass",
    "Inchigeela",
    "Ballyhahill",
    "Dromkeen",
    "Kilcogy",
    "Templeboy",
    "Castlegal",
    "Mullagh",
    "Rossinver",
    "Aughnasheelan",
    "Coolrain",
    "Ballykeeran",
    "Derrylin",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// Both sides free of letters.
    NonAlpha,
    /// English text on the Irish side.
    WrongLanguage,
}

#[derive(Debug, Clone)]
pub struct NoisePair {
    pub kind: NoiseKind,
    pub source: String,
    pub target: String,
}

/// One English document, its Irish counterpart, and the sentence alignment
/// between them.
#[derive(Debug, Clone)]
pub struct SyntheticPair {
    pub source_id: String,
    pub target_id: String,
    pub source_lines: Vec<String>,
    pub target_lines: Vec<String>,
    /// Every bead, in order, with sentence ranges.
    pub links: Vec<(Range<usize>, Range<usize>)>,
    pub noise: Vec<NoisePair>,
    /// Clean beads that should reach the corpus.
    pub clean_beads: usize,
}

impl SyntheticPair {
    pub fn doc_pair_id(&self) -> String {
        format!("{}|{}", self.source_id, self.target_id)
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub pairs: Vec<SyntheticPair>,
}

pub struct SyntheticParams {
    pub documents: usize,
    pub beads_per_doc: Range<usize>,
    pub multi_rate: f64,
    pub noise_rate: f64,
    pub anchor_rate: f64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        SyntheticParams {
            documents: 6,
            beads_per_doc: 40..61,
            multi_rate: 0.10,
            noise_rate: 0.05,
            anchor_rate: 0.4,
        }
    }
}

struct DocBuilder {
    src_lines: Vec<String>,
    tgt_lines: Vec<String>,
    src_line: Vec<String>,
    tgt_line: Vec<String>,
    src_count: usize,
    tgt_count: usize,
}

impl DocBuilder {
    fn push(&mut self, src: Vec<String>, tgt: Vec<String>) -> (Range<usize>, Range<usize>) {
        let s = self.src_count..self.src_count + src.len();
        let t = self.tgt_count..self.tgt_count + tgt.len();
        self.src_count = s.end;
        self.tgt_count = t.end;
        self.src_line.extend(src);
        self.tgt_line.extend(tgt);
        (s, t)
    }

    fn break_line(&mut self) {
        if !self.src_line.is_empty() || !self.tgt_line.is_empty() {
            self.src_lines.push(self.src_line.join(" "));
            self.tgt_lines.push(self.tgt_line.join(" "));
            self.src_line.clear();
            self.tgt_line.clear();
        }
    }
}

pub fn synthetic_corpus(seed: u64, params: &SyntheticParams) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..params.documents).collect();
    order.shuffle(&mut rng);
    let places_per_doc = PLACES.len() / params.documents.max(1);
    let mut pairs = Vec::new();
    for d in 0..params.documents {
        let places = &PLACES[d * places_per_doc..(d + 1) * places_per_doc];
        let mut numbers: Vec<u32> = (0..6)
            .map(|k| 1000 + (d as u32) * 1000 + k * 137 + rng.gen_range(0..100))
            .collect();
        numbers.sort();
        let beads = rng.gen_range(params.beads_per_doc.clone());
        let mut b = DocBuilder {
            src_lines: Vec::new(),
            tgt_lines: Vec::new(),
            src_line: Vec::new(),
            tgt_line: Vec::new(),
            src_count: 0,
            tgt_count: 0,
        };
        let mut links = Vec::new();
        let mut noise = Vec::new();
        let mut clean_beads = 0;
        for _ in 0..beads {
            let roll: f64 = rng.gen();
            if roll < params.noise_rate {
                b.break_line();
                let pair = if noise.len() % 2 == 0 {
                    let text = format!(
                        "{} – {}.{}%",
                        numbers[rng.gen_range(0..numbers.len())],
                        rng.gen_range(10..99),
                        rng.gen_range(0..10)
                    );
                    NoisePair {
                        kind: NoiseKind::NonAlpha,
                        source: text.clone(),
                        target: text,
                    }
                } else {
                    let text = format!("{}.", english_clause(&mut rng));
                    NoisePair {
                        kind: NoiseKind::WrongLanguage,
                        source: text.clone(),
                        target: text,
                    }
                };
                links.push(b.push(vec![pair.source.clone()], vec![pair.target.clone()]));
                noise.push(pair);
                b.break_line();
                continue;
            }
            clean_beads += 1;
            if roll < params.noise_rate + params.multi_rate {
                let (a, c) = (english_clause(&mut rng), english_clause(&mut rng));
                let (ga_a, ga_c) = (
                    irish_clause_near(&mut rng, char_len(&a)),
                    irish_clause_near(&mut rng, char_len(&c)),
                );
                if rng.gen_bool(0.5) {
                    let src = format!("{a}, and {}.", lower_first(&c));
                    links.push(b.push(vec![src], vec![format!("{ga_a}."), format!("{ga_c}.")]));
                } else {
                    let tgt = format!("{ga_a}, agus {}.", lower_first(&ga_c));
                    links.push(b.push(vec![format!("{a}."), format!("{c}.")], vec![tgt]));
                }
            } else {
                let mut en = english_clause(&mut rng);
                let mut ga = irish_clause_near(&mut rng, char_len(&en));
                if rng.gen_bool(params.anchor_rate) {
                    let place = places[rng.gen_range(0..places.len())];
                    let num = numbers[rng.gen_range(0..numbers.len())];
                    en.push_str(&format!(" in {place} ({num})"));
                    ga.push_str(&format!(" i {place} ({num})"));
                }
                links.push(b.push(vec![format!("{en}.")], vec![format!("{ga}.")]));
            }
            if rng.gen_bool(0.3) {
                b.break_line();
            }
        }
        b.break_line();
        pairs.push(SyntheticPair {
            source_id: format!("en/report_{d:02}.txt"),
            target_id: format!("ga/tuarascail_{:02}.txt", order[d]),
            source_lines: b.src_lines,
            target_lines: b.tgt_lines,
            links,
            noise,
            clean_beads,
        });
    }
    SyntheticCorpus { pairs }
}

impl SyntheticCorpus {
    /// Writes every document under `dir`, one file per side.
    pub fn write_to(&self, dir: &Path) -> Vec<PathBuf> {
        let mut written = Vec::new();
        for p in &self.pairs {
            for (id, lines) in [
                (&p.source_id, &p.source_lines),
                (&p.target_id, &p.target_lines),
            ] {
                let path = dir.join(id);
                fs::create_dir_all(path.parent().unwrap()).unwrap();
                fs::write(&path, lines.join("\n") + "\n").unwrap();
                written.push(path);
            }
        }
        written
    }

    pub fn noise(&self) -> impl Iterator<Item = &NoisePair> {
        self.pairs.iter().flat_map(|p| p.noise.iter())
    }

    pub fn expected_links(&self) -> BTreeSet<Link> {
        let mut out = BTreeSet::new();
        for p in &self.pairs {
            for (s, t) in &p.links {
                out.insert((p.doc_pair_id(), (s.start, s.end), (t.start, t.end)));
            }
        }
        out
    }
}

/// `(doc_pair_id, (src_start, src_end), (tgt_start, tgt_end))`, ends exclusive.
pub type Link = (String, (usize, usize), (usize, usize));

/// Links from a `<name>.align.tsv` dump: `doc_pair_id, src range, tgt range`.
pub fn read_link_dump(path: &Path) -> BTreeSet<Link> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .map(|line| {
            let (id, rest) = line.split_once('\t').unwrap();
            let link = bitextforge::sentalign::AlignmentLink::parse_dump_line(rest).unwrap();
            (
                id.to_string(),
                (link.src.start, link.src.end),
                (link.tgt.start, link.tgt.end),
            )
        })
        .collect()
}

/// Precision, recall and F1 of `predicted` against `truth`.
pub fn link_f1<T: Ord>(predicted: &BTreeSet<T>, truth: &BTreeSet<T>) -> (f64, f64, f64) {
    let hits = predicted.intersection(truth).count() as f64;
    let p = if predicted.is_empty() {
        0.0
    } else {
        hits / predicted.len() as f64
    };
    let r = if truth.is_empty() {
        0.0
    } else {
        hits / truth.len() as f64
    };
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f)
}

pub fn bin_path() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_bitextforge"))
}

/// Writes a minimal config for `input` → `output` and returns its path.
pub fn write_config(dir: &Path, input: &Path, output: &Path, extra: &str) -> PathBuf {
    let path = dir.join("bitextforge.toml");
    let text = format!(
        "input_dir = {:?}\noutput_dir = {:?}\n\n[languages]\nsource = \"en\"\ntarget = \"ga\"\n{extra}",
        input.display().to_string(),
        output.display().to_string()
    );
    fs::write(&path, text).unwrap();
    path
}
