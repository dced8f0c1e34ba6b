//! S-box lookup tables, the AES construction, and the bit-naming convention.
//!
//! Input bits are named X1..Xn_in and output bits Y1..Yn_out, X1/Y1 being the
//! most significant bit of the respective byte. State `S_s` is the input value
//! `s` together with its image `table[s]`.

use std::fmt;
use std::path::Path;

use crate::gf256::gf256_inv;

/// The published AES S-box, used as a self-check against the field-arithmetic
/// construction.
const AES_CANONICAL: [u8; 256] = [
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
];

/// Errors from S-box construction, loading, and bit access.
#[derive(Debug, thiserror::Error)]
pub enum SboxError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}, column {col}: expected header `SBOX <n_in> <n_out>`")]
    MalformedHeader { line: usize, col: usize },
    #[error("line {line}, column {col}: bit count {value} out of range (must be 1..=8)")]
    BitCountOutOfRange { line: usize, col: usize, value: u64 },
    #[error("line {line}, column {col}: `{token}` is not a hexadecimal entry")]
    NonHexToken {
        line: usize,
        col: usize,
        token: String,
    },
    #[error("line {line}, column {col}: value {value:#x} out of range for {n_out} output bits")]
    EntryOutOfRange {
        line: usize,
        col: usize,
        value: u64,
        n_out: u8,
    },
    #[error("expected {expected} entries, found {found}")]
    WrongEntryCount { expected: usize, found: usize },
    #[error("table length {found} does not match 2^{n_in}")]
    WrongTableLength { n_in: u8, found: usize },
    #[error("table entry {value:#x} at index {index} exceeds {n_out} output bits")]
    TableEntryOutOfRange { index: usize, value: u16, n_out: u8 },
    #[error("variable {var} out of range for a {n_in}->{n_out} s-box")]
    VariableOutOfRange { var: Variable, n_in: u8, n_out: u8 },
    #[error("state {value} out of range for {n_in} input bits")]
    StateOutOfRange { value: usize, n_in: u8 },
}

/// One input state: an input value in `[0, 2^n_in)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateIndex(u8);

impl StateIndex {
    pub fn new(value: usize, sbox: &SBox) -> Result<Self, SboxError> {
        if value >= sbox.state_count() {
            return Err(SboxError::StateOutOfRange {
                value,
                n_in: sbox.n_in(),
            });
        }
        Ok(StateIndex(value as u8))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for StateIndex {
    /// States are written `S0`, `S1`, ... by decimal input value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// One named bit of an S-box: `In(i)` is Xi, `Out(j)` is Yj (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variable {
    In(u8),
    Out(u8),
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variable::In(i) => write!(f, "X{i}"),
            Variable::Out(j) => write!(f, "Y{j}"),
        }
    }
}

/// A substitution table mapping `n_in`-bit inputs to `n_out`-bit outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SBox {
    name: String,
    n_in: u8,
    n_out: u8,
    table: Vec<u8>,
    permutation: bool,
}

impl SBox {
    /// Validates dimensions and table contents.
    pub fn new(
        name: impl Into<String>,
        n_in: u8,
        n_out: u8,
        table: Vec<u8>,
    ) -> Result<Self, SboxError> {
        if !(1..=8).contains(&n_in) {
            return Err(SboxError::BitCountOutOfRange {
                line: 0,
                col: 0,
                value: n_in as u64,
            });
        }
        if !(1..=8).contains(&n_out) {
            return Err(SboxError::BitCountOutOfRange {
                line: 0,
                col: 0,
                value: n_out as u64,
            });
        }
        let expected = 1usize << n_in;
        if table.len() != expected {
            return Err(SboxError::WrongTableLength {
                n_in,
                found: table.len(),
            });
        }
        if n_out < 8 {
            let limit = 1u16 << n_out;
            for (index, &value) in table.iter().enumerate() {
                if (value as u16) >= limit {
                    return Err(SboxError::TableEntryOutOfRange {
                        index,
                        value: value as u16,
                        n_out,
                    });
                }
            }
        }
        let permutation = n_in == n_out && {
            let mut seen = [false; 256];
            table.iter().all(|&v| !std::mem::replace(&mut seen[v as usize], true))
        };
        Ok(SBox {
            name: name.into(),
            n_in,
            n_out,
            table,
            permutation,
        })
    }

    /// The AES S-box built from field arithmetic: the multiplicative inverse
    /// in GF(2^8) followed by the bit-circulant affine transform with
    /// constant 0x63.
    ///
    /// Panics if the computed table disagrees with the published constants at
    /// any position; a wrong table here invalidates every downstream count.
    pub fn aes() -> SBox {
        let mut table = Vec::with_capacity(256);
        for x in 0..=255u8 {
            let inv = gf256_inv(x);
            let y = inv
                ^ inv.rotate_left(1)
                ^ inv.rotate_left(2)
                ^ inv.rotate_left(3)
                ^ inv.rotate_left(4)
                ^ 0x63;
            table.push(y);
        }
        for (i, (&computed, &canonical)) in table.iter().zip(AES_CANONICAL.iter()).enumerate() {
            assert_eq!(
                computed, canonical,
                "AES construction self-check failed at input {i:#04x}: \
                 computed {computed:#04x}, canonical {canonical:#04x}"
            );
        }
        SBox::new("aes", 8, 8, table).expect("AES table is valid by construction")
    }

    /// The identity permutation on `n` bits.
    pub fn identity(n: u8) -> Result<SBox, SboxError> {
        let table: Vec<u8> = (0..1usize << n).map(|v| v as u8).collect();
        SBox::new(format!("identity{n}"), n, n, table)
    }

    /// Loads an S-box from the text format: a `SBOX <n_in> <n_out>` header
    /// followed by exactly 2^n_in whitespace-separated hex entries. `#`
    /// starts a comment to end of line.
    pub fn from_file(path: impl AsRef<Path>) -> Result<SBox, SboxError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SboxError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "sbox".to_string());
        SBox::parse(&text, name)
    }

    /// Parses the text format. See [`SBox::from_file`].
    pub fn parse(text: &str, name: impl Into<String>) -> Result<SBox, SboxError> {
        let mut tokens = tokenize(text);
        let header_err = |tok: &Option<Token>| {
            let (line, col) = tok.as_ref().map_or((1, 1), |t| (t.line, t.col));
            SboxError::MalformedHeader { line, col }
        };

        let magic = tokens.next();
        match &magic {
            Some(t) if t.text == "SBOX" => {}
            other => return Err(header_err(other)),
        }
        let n_in = parse_bit_count(tokens.next(), &header_err)?;
        let n_out = parse_bit_count(tokens.next(), &header_err)?;

        let expected = 1usize << n_in;
        let mut table = Vec::with_capacity(expected);
        for tok in tokens {
            let digits = tok.text.strip_prefix("0x").or_else(|| tok.text.strip_prefix("0X"));
            let digits = digits.unwrap_or(&tok.text);
            let value = u64::from_str_radix(digits, 16).map_err(|_| SboxError::NonHexToken {
                line: tok.line,
                col: tok.col,
                token: tok.text.clone(),
            })?;
            if value >= 1u64 << n_out {
                return Err(SboxError::EntryOutOfRange {
                    line: tok.line,
                    col: tok.col,
                    value,
                    n_out,
                });
            }
            if table.len() == expected {
                return Err(SboxError::WrongEntryCount {
                    expected,
                    found: table.len() + 1,
                });
            }
            table.push(value as u8);
        }
        if table.len() != expected {
            return Err(SboxError::WrongEntryCount {
                expected,
                found: table.len(),
            });
        }
        SBox::new(name, n_in, n_out, table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_in(&self) -> u8 {
        self.n_in
    }

    pub fn n_out(&self) -> u8 {
        self.n_out
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    /// Number of input states, 2^n_in.
    pub fn state_count(&self) -> usize {
        1usize << self.n_in
    }

    /// True iff n_in = n_out and the table is a bijection.
    pub fn is_permutation(&self) -> bool {
        self.permutation
    }

    pub fn lookup(&self, state: StateIndex) -> u8 {
        self.table[state.index()]
    }

    /// The value of one named bit at one state. Xi is bit `n_in - i` of the
    /// input value; Yj is bit `n_out - j` of the table entry.
    pub fn bit_of_state(&self, state: StateIndex, var: Variable) -> Result<bool, SboxError> {
        match var {
            Variable::In(i) => {
                if i == 0 || i > self.n_in {
                    return Err(SboxError::VariableOutOfRange {
                        var,
                        n_in: self.n_in,
                        n_out: self.n_out,
                    });
                }
                Ok((state.value() >> (self.n_in - i)) & 1 != 0)
            }
            Variable::Out(j) => {
                if j == 0 || j > self.n_out {
                    return Err(SboxError::VariableOutOfRange {
                        var,
                        n_in: self.n_in,
                        n_out: self.n_out,
                    });
                }
                Ok((self.table[state.index()] >> (self.n_out - j)) & 1 != 0)
            }
        }
    }

    /// Combined mask of the variables that take value 1 at state `s`, in
    /// monomial index layout: bit `i-1` for Xi, bit `8 + j - 1` for Yj.
    pub(crate) fn ones_mask(&self, s: usize) -> u16 {
        let x = s as u8;
        let y = self.table[s];
        let in_bits = (x.reverse_bits() >> (8 - self.n_in)) as u16;
        let out_bits = (y.reverse_bits() >> (8 - self.n_out)) as u16;
        in_bits | (out_bits << 8)
    }
}

struct Token {
    text: String,
    line: usize,
    col: usize,
}

fn tokenize(text: &str) -> impl Iterator<Item = Token> + '_ {
    text.lines().enumerate().flat_map(|(line_idx, line)| {
        let line = line.split('#').next().unwrap_or("");
        let mut tokens = Vec::new();
        let mut col = 0usize;
        for piece in line.split_inclusive(char::is_whitespace) {
            let trimmed = piece.trim_end_matches(char::is_whitespace);
            if !trimmed.is_empty() {
                tokens.push(Token {
                    text: trimmed.to_string(),
                    line: line_idx + 1,
                    col: col + 1,
                });
            }
            col += piece.chars().count();
        }
        tokens
    })
}

fn parse_bit_count(
    tok: Option<Token>,
    header_err: &dyn Fn(&Option<Token>) -> SboxError,
) -> Result<u8, SboxError> {
    let tok = match tok {
        Some(t) => t,
        None => return Err(header_err(&None)),
    };
    let value: u64 = tok
        .text
        .parse()
        .map_err(|_| SboxError::MalformedHeader {
            line: tok.line,
            col: tok.col,
        })?;
    if !(1..=8).contains(&value) {
        return Err(SboxError::BitCountOutOfRange {
            line: tok.line,
            col: tok.col,
            value,
        });
    }
    Ok(value as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aes_matches_canonical_table() {
        let sbox = SBox::aes();
        assert_eq!(sbox.table(), &AES_CANONICAL[..]);
        assert!(sbox.is_permutation());
    }

    #[test]
    fn aes_spot_values() {
        let sbox = SBox::aes();
        let s = |v: usize| StateIndex::new(v, &sbox).unwrap();
        assert_eq!(sbox.lookup(s(0x52)), 0x00);
        assert_eq!(sbox.lookup(s(0x08)), 0x30);
        assert_eq!(sbox.lookup(s(0x00)), 0x63);
    }

    #[test]
    fn bit_naming_convention() {
        let sbox = SBox::aes();
        let s64 = StateIndex::new(0x40, &sbox).unwrap();
        for i in 1..=8 {
            let expected = i == 2;
            assert_eq!(
                sbox.bit_of_state(s64, Variable::In(i)).unwrap(),
                expected,
                "X{i} at S64"
            );
        }

        let s9 = StateIndex::new(0x09, &sbox).unwrap();
        assert!(sbox.bit_of_state(s9, Variable::In(5)).unwrap());
        assert!(sbox.bit_of_state(s9, Variable::In(8)).unwrap());

        let s255 = StateIndex::new(0xFF, &sbox).unwrap();
        for i in 1..=8 {
            assert!(sbox.bit_of_state(s255, Variable::In(i)).unwrap());
        }
    }

    /// The one-valued variable sets of the five minimum-weight AES states.
    #[test]
    fn low_weight_state_rows() {
        let sbox = SBox::aes();
        let rows: [(usize, &[Variable]); 5] = [
            (0x08, &[Variable::In(5), Variable::Out(3), Variable::Out(4)]),
            (0x09, &[Variable::In(5), Variable::In(8), Variable::Out(8)]),
            (0x30, &[Variable::In(3), Variable::In(4), Variable::Out(6)]),
            (0x40, &[Variable::In(2), Variable::Out(5), Variable::Out(8)]),
            (0x52, &[Variable::In(2), Variable::In(4), Variable::In(7)]),
        ];
        for (value, expected) in rows {
            let state = StateIndex::new(value, &sbox).unwrap();
            let mut ones = Vec::new();
            for i in 1..=8 {
                if sbox.bit_of_state(state, Variable::In(i)).unwrap() {
                    ones.push(Variable::In(i));
                }
            }
            for j in 1..=8 {
                if sbox.bit_of_state(state, Variable::Out(j)).unwrap() {
                    ones.push(Variable::Out(j));
                }
            }
            assert_eq!(ones, expected, "state {value:#04x}");
        }
    }

    #[test]
    fn variable_out_of_range() {
        let sbox = SBox::identity(3).unwrap();
        let s = StateIndex::new(0, &sbox).unwrap();
        assert!(sbox.bit_of_state(s, Variable::In(4)).is_err());
        assert!(sbox.bit_of_state(s, Variable::Out(0)).is_err());
        assert!(sbox.bit_of_state(s, Variable::In(3)).is_ok());
    }

    #[test]
    fn parse_identity_3() {
        let sbox = SBox::parse("SBOX 3 3\n0 1 2 3 4 5 6 7\n", "test").unwrap();
        assert_eq!(sbox.n_in(), 3);
        assert_eq!(sbox.n_out(), 3);
        assert_eq!(sbox.table(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(sbox.is_permutation());
    }

    #[test]
    fn parse_with_comments_and_prefixes() {
        let text = "# a test box\nSBOX 2 2\n0x0 0x1 # first half\n0x2 3\n";
        let sbox = SBox::parse(text, "t").unwrap();
        assert_eq!(sbox.table(), &[0, 1, 2, 3]);
    }

    #[test]
    fn parse_wrong_entry_count() {
        let err = SBox::parse("SBOX 3 3\n0 1 2 3 4 5 6\n", "t").unwrap_err();
        match err {
            SboxError::WrongEntryCount { expected: 8, found: 7 } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_entry_out_of_range() {
        let err = SBox::parse("SBOX 4 4\n0 1 2 0x1F 4 5 6 7 8 9 a b c d e f\n", "t").unwrap_err();
        match err {
            SboxError::EntryOutOfRange { value: 0x1F, line: 2, .. } => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_non_hex_token() {
        let err = SBox::parse("SBOX 2 2\n0 1 zz 3\n", "t").unwrap_err();
        match err {
            SboxError::NonHexToken { ref token, line: 2, .. } if token == "zz" => {}
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_malformed_header() {
        assert!(matches!(
            SBox::parse("BOX 3 3\n", "t").unwrap_err(),
            SboxError::MalformedHeader { .. }
        ));
        assert!(matches!(
            SBox::parse("SBOX 9 3\n", "t").unwrap_err(),
            SboxError::BitCountOutOfRange { value: 9, .. }
        ));
    }

    #[test]
    fn non_permutation_detected() {
        let sbox = SBox::new("c", 2, 2, vec![1, 1, 1, 1]).unwrap();
        assert!(!sbox.is_permutation());
        let wide = SBox::new("w", 3, 2, vec![0, 1, 2, 3, 0, 1, 2, 3]).unwrap();
        assert!(!wide.is_permutation());
    }

    #[test]
    fn ones_mask_layout() {
        let sbox = SBox::aes();
        // S8: X5 (bit 4), Y3 (bit 8+2), Y4 (bit 8+3).
        assert_eq!(sbox.ones_mask(0x08), (1 << 4) | (1 << 10) | (1 << 11));
        // S82: X2, X4, X7.
        assert_eq!(sbox.ones_mask(0x52), (1 << 1) | (1 << 3) | (1 << 6));
    }
}
