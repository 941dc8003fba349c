//! Instance text format, the random instance generator and the BPPLIB converter.
//!
//! # Instance files
//!
//! ```text
//! rdwv 3 4 6        kind n K L
//! 6 6 3 3 1 4       s v wmin wmax r d   (one line per ad)
//! ...
//! ```
//!
//! `kind` is `maxspace` or `rdwv`. A `maxspace` file may give ads in the short form
//! `s w`, which expands to `s s w w 1 K`. Blank lines and lines starting with `#` are
//! ignored. [`write_instance`] always emits the six-column form, so reading and writing a
//! file in that form reproduces it byte for byte.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Ad, Instance, ModelError, ProblemKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: ModelError,
    },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn field<T: FromStr>(line: usize, name: &str, token: &str) -> Result<T, ParseError> {
    token
        .parse()
        .map_err(|_| syntax(line, format!("invalid {name} `{token}`")))
}

pub fn read_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| ParseError::Truncated("missing header line".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 {
        return Err(syntax(hline, "header must be `kind n K L`"));
    }
    let kind = match h[0] {
        "maxspace" => ProblemKind::MaxSpace,
        "rdwv" => ProblemKind::MaxSpaceRdwv,
        other => return Err(syntax(hline, format!("unknown kind `{other}`"))),
    };
    let n: usize = field(hline, "ad count", h[1])?;
    let k: usize = field(hline, "slot count", h[2])?;
    let cap: u32 = field(hline, "capacity", h[3])?;
    if k == 0 {
        return Err(ParseError::Invalid {
            line: hline,
            source: ModelError::NoSlots,
        });
    }
    if cap == 0 {
        return Err(ParseError::Invalid {
            line: hline,
            source: ModelError::ZeroCapacity,
        });
    }

    let mut ads = Vec::with_capacity(n);
    let mut ad_lines = Vec::with_capacity(n);
    for (line, body) in lines.by_ref().take(n) {
        let t: Vec<&str> = body.split_whitespace().collect();
        let ad = match (t.len(), kind) {
            (6, _) => Ad {
                size: field(line, "size", t[0])?,
                value: field(line, "value", t[1])?,
                freq_min: field(line, "minimum frequency", t[2])?,
                freq_max: field(line, "maximum frequency", t[3])?,
                release: field(line, "release date", t[4])?,
                deadline: field(line, "deadline", t[5])?,
            },
            (2, ProblemKind::MaxSpace) => Ad::maxspace(
                field(line, "size", t[0])?,
                field(line, "frequency", t[1])?,
                k,
            ),
            _ => {
                let form = match kind {
                    ProblemKind::MaxSpace => "`s v wmin wmax r d` or `s w`",
                    ProblemKind::MaxSpaceRdwv => "`s v wmin wmax r d`",
                };
                return Err(syntax(line, format!("expected {form}, found {} fields", t.len())));
            }
        };
        ads.push(ad);
        ad_lines.push(line);
    }
    if ads.len() < n {
        return Err(ParseError::Truncated(format!(
            "header declares {n} ads, found {}",
            ads.len()
        )));
    }
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, format!("more than the declared {n} ads")));
    }
    Instance::new(kind, k, cap, ads).map_err(|e| {
        let line = match &e {
            ModelError::InvalidAd { ad, .. } | ModelError::NotMaxSpace { ad } => ad_lines[ad - 1],
            _ => hline,
        };
        ParseError::Invalid { line, source: e }
    })
}

pub fn write_instance<W: Write>(instance: &Instance, out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "{} {} {} {}",
        instance.kind(),
        instance.ad_count(),
        instance.slot_count(),
        instance.capacity()
    )?;
    for a in instance.ads() {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            a.size, a.value, a.freq_min, a.freq_max, a.release, a.deadline
        )?;
    }
    Ok(())
}

pub fn instance_to_string(instance: &Instance) -> String {
    let mut buf = Vec::new();
    write_instance(instance, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("instance text is ASCII")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SizeClass {
    /// `[1, L/4]`
    Small,
    /// `(L/4, L/2]`
    Medium,
    /// `(L/2, L]`
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FreqClass {
    /// `wmin` in `[1, 5]`, `wmax` in `[6, 10]`.
    Infrequent,
    /// `wmin` in `[11, 15]`, `wmax` in `[16, 20]`.
    MediumFreq,
    /// `wmin` in `[21, 25]`, `wmax` in `[26, 30]`.
    VeryFrequent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProfitClass {
    /// `v = s`.
    SizeLinked,
    /// `v` in `[1, 100]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WindowClass {
    /// `r = 1`, `d = K`.
    None,
    /// `r` in `[1, K - wmin]`, `d` in `[r + wmin, K]`.
    Random,
}

impl SizeClass {
    pub const ALL: [SizeClass; 3] = [SizeClass::Small, SizeClass::Medium, SizeClass::Large];

    /// Inclusive size range for capacity `l`, with `L/4` and `L/2` rounded down.
    pub fn range(self, l: u32) -> (u32, u32) {
        match self {
            SizeClass::Small => (1, l / 4),
            SizeClass::Medium => (l / 4 + 1, l / 2),
            SizeClass::Large => (l / 2 + 1, l),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Medium => "medium",
            SizeClass::Large => "large",
        }
    }
}

impl FreqClass {
    pub const ALL: [FreqClass; 3] = [FreqClass::Infrequent, FreqClass::MediumFreq, FreqClass::VeryFrequent];

    pub fn min_range(self) -> (u32, u32) {
        match self {
            FreqClass::Infrequent => (1, 5),
            FreqClass::MediumFreq => (11, 15),
            FreqClass::VeryFrequent => (21, 25),
        }
    }

    pub fn max_range(self) -> (u32, u32) {
        match self {
            FreqClass::Infrequent => (6, 10),
            FreqClass::MediumFreq => (16, 20),
            FreqClass::VeryFrequent => (26, 30),
        }
    }

    fn tag(self) -> &'static str {
        match self {
            FreqClass::Infrequent => "infrequent",
            FreqClass::MediumFreq => "medium-freq",
            FreqClass::VeryFrequent => "very-frequent",
        }
    }
}

impl ProfitClass {
    pub const ALL: [ProfitClass; 2] = [ProfitClass::SizeLinked, ProfitClass::Random];

    fn tag(self) -> &'static str {
        match self {
            ProfitClass::SizeLinked => "size-linked",
            ProfitClass::Random => "random-profit",
        }
    }
}

impl WindowClass {
    pub const ALL: [WindowClass; 2] = [WindowClass::None, WindowClass::Random];

    fn tag(self) -> &'static str {
        match self {
            WindowClass::None => "no-window",
            WindowClass::Random => "window",
        }
    }
}

/// One of the 36 generator classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceClass {
    pub size: SizeClass,
    pub freq: FreqClass,
    pub profit: ProfitClass,
    pub window: WindowClass,
}

impl InstanceClass {
    pub fn all() -> Vec<InstanceClass> {
        let mut v = Vec::with_capacity(36);
        for size in SizeClass::ALL {
            for freq in FreqClass::ALL {
                for profit in ProfitClass::ALL {
                    for window in WindowClass::ALL {
                        v.push(InstanceClass { size, freq, profit, window });
                    }
                }
            }
        }
        v
    }

    /// Whether MAXSPACE instances can be drawn from this class.
    pub fn is_maxspace_compatible(self) -> bool {
        self.profit == ProfitClass::SizeLinked && self.window == WindowClass::None
    }
}

impl fmt::Display for InstanceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.size.tag(),
            self.freq.tag(),
            self.profit.tag(),
            self.window.tag()
        )
    }
}

impl FromStr for InstanceClass {
    type Err = String;

    /// Parses `size,freq,profit,window`, e.g. `small,infrequent,size-linked,no-window`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(format!("class `{s}` must have four comma-separated parts"));
        }
        fn pick<T: Copy>(all: &[T], tag: fn(T) -> &'static str, token: &str, what: &str) -> Result<T, String> {
            all.iter().copied().find(|&x| tag(x) == token).ok_or_else(|| {
                let options: Vec<_> = all.iter().map(|&x| tag(x)).collect();
                format!("unknown {what} class `{token}` (expected one of {})", options.join(", "))
            })
        }
        Ok(InstanceClass {
            size: pick(&SizeClass::ALL, SizeClass::tag, parts[0], "size")?,
            freq: pick(&FreqClass::ALL, FreqClass::tag, parts[1], "frequency")?,
            profit: pick(&ProfitClass::ALL, ProfitClass::tag, parts[2], "profit")?,
            window: pick(&WindowClass::ALL, WindowClass::tag, parts[3], "window")?,
        })
    }
}

/// Instance dimensions: `n` ads, `K` slots of capacity `L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub k: usize,
    pub l: u32,
}

impl FromStr for Dims {
    type Err = String;

    /// Parses `n,K,L`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("dims `{s}` must be `n,K,L`"));
        }
        let num = |t: &str| t.parse::<u64>().map_err(|_| format!("invalid number `{t}` in dims"));
        Ok(Dims {
            n: num(parts[0])? as usize,
            k: num(parts[1])? as usize,
            l: num(parts[2])? as u32,
        })
    }
}

/// The four standard instance sizes.
pub const STANDARD_DIMS: [Dims; 4] = [
    Dims { n: 100, k: 75, l: 50 },
    Dims { n: 500, k: 250, l: 100 },
    Dims { n: 1000, k: 500, l: 250 },
    Dims { n: 10000, k: 500, l: 200 },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: ProblemKind,
    pub class: InstanceClass,
    pub dims: Dims,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("{0} size class is empty for capacity {1}")]
    EmptySizeClass(&'static str, u32),
    #[error("frequency class needs up to {needed} slots but K = {k}")]
    TooFewSlots { needed: u32, k: usize },
    #[error("MAXSPACE instances need size-linked profits and no windows, got class {0}")]
    NotMaxSpaceClass(InstanceClass),
    #[error("dims must have n, K and L at least 1")]
    EmptyDims,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<(), GeneratorError> {
        let Dims { n, k, l } = self.dims;
        if n == 0 || k == 0 || l == 0 {
            return Err(GeneratorError::EmptyDims);
        }
        let (lo, hi) = self.class.size.range(l);
        if lo > hi {
            return Err(GeneratorError::EmptySizeClass(self.class.size.tag(), l));
        }
        let wmin_hi = self.class.freq.min_range().1;
        let needed = match self.class.window {
            WindowClass::None => wmin_hi,
            WindowClass::Random => wmin_hi + 1,
        };
        if needed as usize > k {
            return Err(GeneratorError::TooFewSlots { needed, k });
        }
        if self.kind == ProblemKind::MaxSpace && !self.class.is_maxspace_compatible() {
            return Err(GeneratorError::NotMaxSpaceClass(self.class));
        }
        Ok(())
    }
}

/// Draws one ad of `class`. The draw order is size, `wmin`, `wmax`, value, release,
/// deadline. Callers must have validated the class against `dims`.
///
/// For `ProblemKind::MaxSpace` a single frequency is drawn from `[wmin_lo, wmax_hi]` of the
/// frequency class and used as both bounds.
pub fn sample_ad<R: Rng + ?Sized>(
    kind: ProblemKind,
    class: InstanceClass,
    dims: Dims,
    rng: &mut R,
) -> Ad {
    let k = dims.k as u32;
    let (slo, shi) = class.size.range(dims.l);
    let size = rng.gen_range(slo..=shi);
    let (min_lo, min_hi) = class.freq.min_range();
    let (max_lo, max_hi) = class.freq.max_range();
    if kind == ProblemKind::MaxSpace {
        let w = rng.gen_range(min_lo..=max_hi);
        return Ad::maxspace(size, w, dims.k);
    }
    let freq_min = rng.gen_range(min_lo..=min_hi);
    let freq_max = rng.gen_range(max_lo..=max_hi);
    let value = match class.profit {
        ProfitClass::SizeLinked => size,
        ProfitClass::Random => rng.gen_range(1..=100),
    };
    let (release, deadline) = match class.window {
        WindowClass::None => (1, k),
        WindowClass::Random => {
            let r = rng.gen_range(1..=k - freq_min);
            let d = rng.gen_range(r + freq_min..=k);
            (r, d)
        }
    };
    Ad {
        size,
        value,
        freq_min,
        freq_max,
        release,
        deadline,
    }
}

/// Generates an instance; the same spec always yields the same instance.
pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GeneratorError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ads = (0..spec.dims.n)
        .map(|_| sample_ad(spec.kind, spec.class, spec.dims, &mut rng))
        .collect();
    Ok(Instance::new(spec.kind, spec.dims.k, spec.dims.l, ads)
        .expect("generated ads satisfy the model invariants"))
}

/// One entry of a generated batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub kind: ProblemKind,
    pub class: String,
    pub dims: Dims,
    pub seed: u64,
}

/// `count` instances per class, seeded `base_seed, base_seed + 1, ...` in class order.
pub fn batch_specs(
    kind: ProblemKind,
    classes: &[InstanceClass],
    dims: Dims,
    count: usize,
    base_seed: u64,
) -> Vec<GeneratorSpec> {
    let mut specs = Vec::with_capacity(classes.len() * count);
    let mut seed = base_seed;
    for &class in classes {
        for _ in 0..count {
            specs.push(GeneratorSpec { kind, class, dims, seed });
            seed += 1;
        }
    }
    specs
}

/// File name used for a generated instance.
pub fn spec_file_name(spec: &GeneratorSpec) -> String {
    let class = spec.class.to_string().replace(',', "_");
    format!(
        "{}_{}_{}-{}-{}_s{}.inst",
        spec.kind, class, spec.dims.n, spec.dims.k, spec.dims.l, spec.seed
    )
}

/// How the slot count of a converted BPPLIB instance is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BppClass {
    /// `K = ceil(sum of demands / 3)`.
    FalkenauerTriples,
    /// `K = ceil(sum of length * demand / L)`.
    Other,
}

/// A converted BPPLIB instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conversion {
    pub instance: Instance,
    /// Items (0-based) whose demand exceeded `K` and was clamped to `K` copies.
    pub clamped: Vec<usize>,
}

/// Converts a BPPLIB cutting-stock (or plain bin-packing) file to a MAXSPACE instance.
///
/// The file holds the item count, the bin capacity `H`, then one `length [demand]` line per
/// item (demand defaults to 1). Each item becomes an ad with `s = length` and
/// `w = min(demand, K)`; `L = H`.
pub fn from_bpplib(text: &str, class: BppClass) -> Result<Conversion, ParseError> {
    let mut lines = content_lines(text);
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| ParseError::Truncated(format!("missing {what}")))
    };
    let (cline, count) = next("item count")?;
    let m: usize = field(cline, "item count", count)?;
    let (hline, cap) = next("capacity")?;
    let h: u32 = field(hline, "capacity", cap)?;
    if h == 0 {
        return Err(ParseError::Invalid {
            line: hline,
            source: ModelError::ZeroCapacity,
        });
    }
    let mut items = Vec::with_capacity(m);
    for _ in 0..m {
        let (line, body) = next("item line")?;
        let t: Vec<&str> = body.split_whitespace().collect();
        let (len, demand) = match t.as_slice() {
            [l] => (field::<u32>(line, "length", l)?, 1u64),
            [l, d] => (field::<u32>(line, "length", l)?, field::<u64>(line, "demand", d)?),
            _ => return Err(syntax(line, "expected `length demand`")),
        };
        if len == 0 || demand == 0 {
            return Err(syntax(line, "length and demand must be at least 1"));
        }
        items.push((line, len, demand));
    }
    if let Some((line, _)) = lines.next() {
        return Err(syntax(line, format!("more than the declared {m} items")));
    }

    let k = match class {
        BppClass::FalkenauerTriples => items.iter().map(|i| i.2).sum::<u64>().div_ceil(3),
        BppClass::Other => items
            .iter()
            .map(|i| u64::from(i.1) * i.2)
            .sum::<u64>()
            .div_ceil(u64::from(h)),
    };
    if k == 0 {
        return Err(ParseError::Invalid {
            line: cline,
            source: ModelError::NoSlots,
        });
    }
    let k = k as usize;
    let mut clamped = Vec::new();
    let ads = items
        .iter()
        .enumerate()
        .map(|(i, &(_, len, demand))| {
            if demand > k as u64 {
                clamped.push(i);
            }
            Ad::maxspace(len, demand.min(k as u64) as u32, k)
        })
        .collect();
    let instance = Instance::new(ProblemKind::MaxSpace, k, h, ads).map_err(|e| {
        let line = match &e {
            ModelError::InvalidAd { ad, .. } | ModelError::NotMaxSpace { ad } => items[ad - 1].0,
            _ => cline,
        };
        ParseError::Invalid { line, source: e }
    })?;
    Ok(Conversion { instance, clamped })
}
