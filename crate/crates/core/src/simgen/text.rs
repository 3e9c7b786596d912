use rand::Rng;

const ONSETS: [&str; 20] = ["b", "d", "f", "g", "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "sh", "ch"];
const VOWELS: [&str; 8] = ["a", "e", "i", "o", "u", "ai", "ou", "ia"];
const CODAS: [&str; 8] = ["", "n", "r", "s", "l", "m", "th", "nd"];

/// Pronounceable pseudo-word number `i`; distinct for distinct `i`.
pub fn word(i: usize) -> String {
    let mut out = String::new();
    let mut k = i;
    let syllables = 2 + i % 2;
    for _ in 0..syllables {
        out.push_str(ONSETS[k % ONSETS.len()]);
        k /= ONSETS.len();
        out.push_str(VOWELS[k % VOWELS.len()]);
        k /= VOWELS.len();
        out.push_str(CODAS[k % CODAS.len()]);
        k /= CODAS.len();
    }
    // Whatever is left of the index keeps words distinct beyond the syllable space.
    if k > 0 {
        out.push_str(&k.to_string());
    }
    out
}

pub const LEXICON_SIZE: usize = 20_000;

/// Zipf-distributed picks from a fixed set of word indices.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Vocabulary {
    pub fn sample<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Self {
        let words: Vec<usize> = (0..size.max(1)).map(|_| rng.random_range(0..LEXICON_SIZE)).collect();
        let mut acc = 0.0;
        let cumulative = (0..words.len())
            .map(|r| {
                acc += 1.0 / (r as f64 + 1.0);
                acc
            })
            .collect();
        Vocabulary { words, cumulative }
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let x = rng.random::<f64>() * self.cumulative.last().unwrap();
        let i = self.cumulative.partition_point(|&c| c < x).min(self.words.len() - 1);
        word(self.words[i])
    }

    /// A comment of several words, at least `min_chars` long.
    pub fn comment<R: Rng + ?Sized>(&self, rng: &mut R, min_chars: usize) -> String {
        let n = rng.random_range(5..10);
        let mut words: Vec<String> = (0..n).map(|_| self.pick(rng)).collect();
        while words.iter().map(|w| w.len() + 1).sum::<usize>() < min_chars + 1 {
            words.push(self.pick(rng));
        }
        words.join(" ")
    }
}

pub fn headline<R: Rng + ?Sized>(rng: &mut R) -> String {
    let n = rng.random_range(7..12);
    let words: Vec<String> = (0..n).map(|_| word(rng.random_range(0..LEXICON_SIZE))).collect();
    let mut h = words.join(" ");
    if let Some(first) = h.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    h
}

pub fn short_url<R: Rng + ?Sized>(rng: &mut R) -> String {
    const ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    let code: String = (0..6).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char).collect();
    format!("http://aje.me/{code}")
}
