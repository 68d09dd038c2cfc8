//! Rational generator matrices over GF(2) and their trellis realizations.
//!
//! Generators are written in octal, most significant digit first, with the
//! leftmost bit of the binary expansion carrying the `D^0` coefficient, so
//! `7 = 1 + D + D^2` and `5 = 1 + D^2`. Grammar:
//!
//! ```text
//! generator := row (';' row)*
//! row       := entry ((whitespace | ',') entry)*
//! entry     := OCTAL ('/' OCTAL)?
//! ```
//!
//! `"1,5/7"` is the rate-1/2 recursive systematic encoder with feedback
//! `1 + D + D^2` and feedforward `1 + D^2`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf2;

/// Largest accepted polynomial degree.
pub const MAX_DEGREE: u32 = 15;

/// Polynomial over GF(2); bit `i` is the coefficient of `D^i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Poly(pub u32);

impl Poly {
    pub const ZERO: Poly = Poly(0);
    pub const ONE: Poly = Poly(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Degree, with `deg 0 = 0` for convenience in memory computations.
    pub fn degree(self) -> u32 {
        if self.0 == 0 {
            0
        } else {
            31 - self.0.leading_zeros()
        }
    }

    pub fn coeff(self, i: u32) -> bool {
        i < 32 && self.0 >> i & 1 == 1
    }

    /// Interpret an octal value under the leftmost-bit-is-`D^0` convention.
    pub fn from_octal_value(value: u32) -> Poly {
        if value == 0 {
            return Poly::ZERO;
        }
        let len = 32 - value.leading_zeros();
        let mut p = 0u32;
        for j in 0..len {
            if value >> (len - 1 - j) & 1 == 1 {
                p |= 1 << j;
            }
        }
        Poly(p)
    }

    /// Octal text for this polynomial under the same convention.
    pub fn to_octal(self) -> String {
        if self.0 == 0 {
            return "0".into();
        }
        let len = self.degree() + 1;
        let mut v = 0u32;
        for j in 0..len {
            if self.coeff(j) {
                v |= 1 << (len - 1 - j);
            }
        }
        format!("{v:o}")
    }

    pub fn mul(self, other: Poly) -> Poly {
        let mut acc = 0u64;
        for i in 0..32 {
            if self.0 >> i & 1 == 1 {
                acc ^= (other.0 as u64) << i;
            }
        }
        debug_assert!(acc >> 32 == 0, "polynomial product overflow");
        Poly(acc as u32)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(self, divisor: Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.degree();
        let mut rem = self.0;
        let mut quot = 0u32;
        while rem != 0 && (31 - rem.leading_zeros()) >= dd {
            let shift = (31 - rem.leading_zeros()) - dd;
            quot |= 1 << shift;
            rem ^= divisor.0 << shift;
        }
        (Poly(quot), Poly(rem))
    }

    pub fn gcd(self, other: Poly) -> Poly {
        let (mut a, mut b) = (self, other);
        while !b.is_zero() {
            let r = a.div_rem(b).1;
            a = b;
            b = r;
        }
        a
    }

    pub fn lcm(self, other: Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::ZERO;
        }
        self.div_rem(self.gcd(other)).0.mul(other)
    }

    /// First `len` coefficients of the power series `num / den`.
    pub fn series(num: Poly, den: Poly, len: usize) -> Vec<u8> {
        assert!(den.coeff(0), "denominator needs a unit constant term");
        let mut out = vec![0u8; len];
        for t in 0..len {
            // den * out = num  =>  out_t = num_t + sum_{j>=1} den_j out_{t-j}
            let mut bit = num.coeff(t as u32) as u8;
            for j in 1..=den.degree() as usize {
                if j <= t && den.coeff(j as u32) {
                    bit ^= out[t - j];
                }
            }
            out[t] = bit;
        }
        out
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "0");
        }
        let mut first = true;
        for i in 0..32 {
            if self.coeff(i) {
                if !first {
                    write!(f, "+")?;
                }
                first = false;
                match i {
                    0 => write!(f, "1")?,
                    1 => write!(f, "D")?,
                    _ => write!(f, "D^{i}")?,
                }
            }
        }
        Ok(())
    }
}

/// One generator-matrix entry `num / den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    fn is_one(&self) -> bool {
        self.num == Poly::ONE && self.den == Poly::ONE
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

/// Parsed `k × n` rational generator matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    text: String,
    num_inputs: usize,
    num_outputs: usize,
    entries: Vec<Vec<Rational>>,
    /// `systematic[j] = Some(i)` when output `j` repeats input `i`.
    systematic: Vec<Option<usize>>,
}

impl GeneratorSpec {
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.num_outputs
    }

    pub fn entry(&self, input: usize, output: usize) -> Rational {
        self.entries[input][output]
    }

    pub fn systematic_streams(&self) -> &[Option<usize>] {
        &self.systematic
    }

    /// `max(deg num, deg den)` over all entries.
    pub fn memory(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .map(|e| e.num.degree().max(e.den.degree()) as usize)
            .max()
            .unwrap_or(0)
    }
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err<T>(&self, pos: usize, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && (self.bytes[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn octal(&mut self, what: &str) -> Result<(Poly, usize)> {
        let start = self.pos;
        let mut value: u64 = 0;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() {
                if !(b'0'..=b'7').contains(&c) {
                    return self.err(self.pos, format!("malformed octal digit '{}'", c as char));
                }
                value = value * 8 + (c - b'0') as u64;
                if value >= 1 << (MAX_DEGREE + 1) {
                    return self.err(
                        start,
                        format!("{what} exceeds the degree cap of {MAX_DEGREE}"),
                    );
                }
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return match self.peek() {
                Some(c) => self.err(start, format!("expected octal {what}, found '{}'", c as char)),
                None => self.err(start, format!("expected octal {what}, found end of input")),
            };
        }
        Ok((Poly::from_octal_value(value as u32), start))
    }
}

/// Parse a generator description such as `"1,5/7"` or `"1 0 1/7; 0 1 5/7"`.
pub fn parse_generator(text: &str) -> Result<GeneratorSpec> {
    let mut lx = Lexer {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let mut rows: Vec<Vec<Rational>> = vec![Vec::new()];
    let mut row_starts = vec![0usize];
    loop {
        lx.skip_ws();
        if rows.last().unwrap().is_empty() {
            *row_starts.last_mut().unwrap() = lx.pos;
        }
        let (num, _) = lx.octal("numerator")?;
        lx.skip_ws();
        let mut den = Poly::ONE;
        if lx.peek() == Some(b'/') {
            lx.pos += 1;
            lx.skip_ws();
            let (d, dpos) = lx.octal("denominator")?;
            if !d.coeff(0) {
                return lx.err(dpos, "denominator has zero constant term");
            }
            den = d;
        }
        rows.last_mut().unwrap().push(Rational { num, den });
        lx.skip_ws();
        match lx.peek() {
            None => break,
            Some(b',') => {
                lx.pos += 1;
            }
            Some(b';') => {
                lx.pos += 1;
                rows.push(Vec::new());
                row_starts.push(lx.pos);
            }
            Some(c) if c.is_ascii_alphanumeric() => {}
            Some(c) => return lx.err(lx.pos, format!("unexpected character '{}'", c as char)),
        }
    }

    let n = rows[0].len();
    for (r, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse {
                pos: row_starts[r],
                msg: format!("row {} has {} entries, expected {}", r + 1, row.len(), n),
            });
        }
    }
    let k = rows.len();

    // an output column equal to a unit vector repeats that input
    let mut systematic = vec![None; n];
    let mut claimed = vec![false; k];
    for (j, slot) in systematic.iter_mut().enumerate() {
        let ones: Vec<usize> = (0..k).filter(|&i| rows[i][j].is_one()).collect();
        let others_zero = (0..k).all(|i| rows[i][j].is_one() || rows[i][j].is_zero());
        if ones.len() == 1 && others_zero && !claimed[ones[0]] {
            claimed[ones[0]] = true;
            *slot = Some(ones[0]);
        }
    }

    let spec = GeneratorSpec {
        text: text.trim().to_string(),
        num_inputs: k,
        num_outputs: n,
        entries: rows,
        systematic,
    };
    if spec.memory() == 0 {
        return Err(Error::InvalidGenerator(format!(
            "'{}' has memory 0; at least one delay element is required",
            spec.text
        )));
    }
    Ok(spec)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamRole {
    Input,
    Parity,
}

/// A symbol stream leaving the trellis factor node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stream {
    pub role: StreamRole,
    /// Row vector over `(σ, u)`: bits `0..m` act on the state, bits
    /// `m..m+k` on the inputs.
    pub functional: u64,
    /// Edge index in the compact graph (position in the stream list).
    pub edge: usize,
    /// Generator output column, or the input index for input streams.
    pub source: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StreamLayout {
    streams: Vec<Stream>,
}

impl StreamLayout {
    pub fn streams(&self) -> &[Stream] {
        &self.streams
    }

    pub fn len(&self) -> usize {
        self.streams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.streams.is_empty()
    }

    pub fn input_count(&self) -> usize {
        self.streams
            .iter()
            .filter(|s| s.role == StreamRole::Input)
            .count()
    }

    pub fn parity_count(&self) -> usize {
        self.len() - self.input_count()
    }
}

/// Linear time-invariant trellis `next = A σ + B u`, `y = C σ + D u`.
///
/// Vectors pack the state into bits `0..m` and the input into bits
/// `m..m+k`. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trellis {
    memory: usize,
    num_inputs: usize,
    /// image of each unit vector of `(σ, u)` under `[A B]`
    next_cols: Vec<u64>,
    /// one row per generator output column, over `(σ, u)`
    outputs: Vec<u64>,
    layout: StreamLayout,
    generator: GeneratorSpec,
}

/// Observer canonical form of one output column
/// `d(D) y = Σ_i n_i(D) u_i`, where `d` is the least common multiple of
/// the column's denominators.
struct ColumnRealization {
    memory: usize,
    numerators: Vec<Poly>,
    denominator: Poly,
}

fn realize_column(spec: &GeneratorSpec, j: usize) -> ColumnRealization {
    let k = spec.num_inputs;
    let den = (0..k).fold(Poly::ONE, |acc, i| acc.lcm(spec.entries[i][j].den));
    let numerators: Vec<Poly> = (0..k)
        .map(|i| {
            let e = spec.entries[i][j];
            e.num.mul(den.div_rem(e.den).0)
        })
        .collect();
    let memory = numerators
        .iter()
        .map(|p| p.degree())
        .chain(std::iter::once(den.degree()))
        .max()
        .unwrap() as usize;
    ColumnRealization {
        memory,
        numerators,
        denominator: den,
    }
}

/// Realize `spec` as a trellis. Systematic outputs are merged into their
/// input streams; every other output becomes a parity stream realized in
/// observer canonical form, with the column realizations stacked.
pub fn build_trellis(spec: &GeneratorSpec) -> Result<Trellis> {
    let k = spec.num_inputs;
    let parity_cols: Vec<usize> = (0..spec.num_outputs)
        .filter(|&j| spec.systematic[j].is_none())
        .collect();
    let cols: Vec<ColumnRealization> = parity_cols.iter().map(|&j| realize_column(spec, j)).collect();
    let m: usize = cols.iter().map(|c| c.memory).sum();
    if m == 0 {
        return Err(Error::InvalidGenerator(format!(
            "'{}' realizes with memory 0",
            spec.text
        )));
    }
    if m + k > 62 {
        return Err(Error::UnsupportedTrellis(format!(
            "state plus input width {} exceeds 62 bits",
            m + k
        )));
    }

    let input_bit = |i: usize| 1u64 << (m + i);
    // next_rows[r] is the row of [A B] producing next-state bit r
    let mut next_rows = vec![0u64; m];
    let mut outputs = vec![0u64; spec.num_outputs];
    for (j, sys) in spec.systematic.iter().enumerate() {
        if let Some(i) = sys {
            outputs[j] = input_bit(*i);
        }
    }
    let mut offset = 0usize;
    for (col, &j) in cols.iter().zip(&parity_cols) {
        let mm = col.memory;
        // y = s_1 + Σ_i n_{i,0} u_i
        let mut y = 0u64;
        if mm > 0 {
            y |= 1 << offset;
        }
        for (i, n) in col.numerators.iter().enumerate() {
            if n.coeff(0) {
                y |= input_bit(i);
            }
        }
        outputs[j] = y;
        // s_l(t+1) = s_{l+1}(t) + Σ_i n_{i,l} u_i + d_l y
        for l in 1..=mm {
            let mut row = 0u64;
            if l < mm {
                row |= 1 << (offset + l);
            }
            for (i, n) in col.numerators.iter().enumerate() {
                if n.coeff(l as u32) {
                    row ^= input_bit(i);
                }
            }
            if col.denominator.coeff(l as u32) {
                row ^= y;
            }
            next_rows[offset + l - 1] = row;
        }
        offset += mm;
    }

    let mut next_cols = vec![0u64; m + k];
    for (r, &row) in next_rows.iter().enumerate() {
        for (c, col) in next_cols.iter_mut().enumerate() {
            if row >> c & 1 == 1 {
                *col |= 1 << r;
            }
        }
    }

    let mut streams = Vec::new();
    for i in 0..k {
        streams.push(Stream {
            role: StreamRole::Input,
            functional: input_bit(i),
            edge: streams.len(),
            source: i,
        });
    }
    for &j in &parity_cols {
        streams.push(Stream {
            role: StreamRole::Parity,
            functional: outputs[j],
            edge: streams.len(),
            source: j,
        });
    }

    let trellis = Trellis {
        memory: m,
        num_inputs: k,
        next_cols,
        outputs,
        layout: StreamLayout { streams },
        generator: spec.clone(),
    };
    trellis.check_impulse_responses(2 * m + 8)?;
    Ok(trellis)
}

impl Trellis {
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_states(&self) -> usize {
        1 << self.memory
    }

    pub fn layout(&self) -> &StreamLayout {
        &self.layout
    }

    pub fn streams(&self) -> &[Stream] {
        &self.layout.streams
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.generator
    }

    /// Width of the packed `(σ, u)` branch vector.
    pub fn branch_bits(&self) -> usize {
        self.memory + self.num_inputs
    }

    pub fn pack(&self, state: u64, input: u64) -> u64 {
        state | input << self.memory
    }

    /// `[A B] · v` for a packed branch vector.
    pub fn next_of(&self, v: u64) -> u64 {
        let mut out = 0u64;
        let mut bits = v;
        while bits != 0 {
            let c = bits.trailing_zeros() as usize;
            out ^= self.next_cols[c];
            bits &= bits - 1;
        }
        out
    }

    /// Images of the unit vectors under `[A B]`.
    pub fn next_columns(&self) -> &[u64] {
        &self.next_cols
    }

    /// State matrix `A` as rows (bit `c` of row `r` is `A[r][c]`).
    pub fn state_matrix(&self) -> Vec<u64> {
        (0..self.memory)
            .map(|r| {
                (0..self.memory).fold(0u64, |acc, c| acc | ((self.next_cols[c] >> r & 1) << c))
            })
            .collect()
    }

    /// Input matrix `B` as rows over the `k` inputs.
    pub fn input_matrix(&self) -> Vec<u64> {
        (0..self.memory)
            .map(|r| {
                (0..self.num_inputs).fold(0u64, |acc, c| {
                    acc | ((self.next_cols[self.memory + c] >> r & 1) << c)
                })
            })
            .collect()
    }

    /// Next state and the packed stream symbols (bit `s` is stream `s`).
    pub fn branch(&self, state: u64, input: u64) -> (u64, u64) {
        let v = self.pack(state, input);
        let mut symbols = 0u64;
        for (s, st) in self.layout.streams.iter().enumerate() {
            if gf2::dot(st.functional, v) {
                symbols |= 1 << s;
            }
        }
        (self.next_of(v), symbols)
    }

    /// Generator outputs (one bit per output column, systematic included).
    pub fn output_bits(&self, state: u64, input: u64) -> u64 {
        let v = self.pack(state, input);
        self.outputs
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &row)| acc | ((gf2::dot(row, v) as u64) << j))
    }

    /// Whether every state is reachable from the zero state.
    pub fn is_controllable(&self) -> bool {
        let mut reach = gf2::Subspace::zero(self.memory);
        loop {
            let mut vecs: Vec<u64> = reach.basis().to_vec();
            for &b in reach.basis() {
                vecs.push(self.next_of(b));
            }
            for i in 0..self.num_inputs {
                vecs.push(self.next_cols[self.memory + i]);
            }
            let grown = gf2::Subspace::span(self.memory, vecs);
            if grown == reach {
                return reach.is_full();
            }
            reach = grown;
        }
    }

    /// Response of every generator output to a unit impulse on `input`,
    /// starting from the zero state.
    pub fn impulse_response(&self, input: usize, len: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![0u8; len]; self.outputs.len()];
        let mut state = 0u64;
        for t in 0..len {
            let u = if t == 0 { 1u64 << input } else { 0 };
            let y = self.output_bits(state, u);
            for (j, o) in out.iter_mut().enumerate() {
                o[t] = (y >> j & 1) as u8;
            }
            state = self.next_of(self.pack(state, u));
        }
        out
    }

    fn check_impulse_responses(&self, len: usize) -> Result<()> {
        let spec = &self.generator;
        for i in 0..spec.num_inputs {
            let resp = self.impulse_response(i, len);
            for (j, r) in resp.iter().enumerate() {
                let e = spec.entries[i][j];
                if *r != Poly::series(e.num, e.den, len) {
                    return Err(Error::InvalidGenerator(format!(
                        "realization of entry ({i},{j}) does not match its transfer function"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Input sequence of `memory` sections steering `state` to zero.
    pub fn termination_inputs(&self, state: u64) -> Result<Vec<u64>> {
        let m = self.memory;
        let k = self.num_inputs;
        // state after m steps: A^m σ + Σ_j A^{m-1-j} B u_j; unknown bit j*k+i is u_j[i]
        let nvars = m * k;
        let mut rows = vec![0u64; m];
        let mut rhs_state = state;
        for _ in 0..m {
            rhs_state = self.next_of(rhs_state);
        }
        for j in 0..m {
            for i in 0..k {
                let mut img = self.next_cols[m + i];
                for _ in 0..(m - 1 - j) {
                    img = self.next_of(img);
                }
                for (r, row) in rows.iter_mut().enumerate() {
                    if img >> r & 1 == 1 {
                        *row |= 1 << (j * k + i);
                    }
                }
            }
        }
        let x = gf2::solve(&rows, rhs_state, nvars).ok_or_else(|| {
            Error::UnsupportedTrellis("state cannot be steered to zero in m sections".into())
        })?;
        Ok((0..m).map(|j| (x >> (j * k)) & ((1 << k) - 1)).collect())
    }

    /// Encode `inputs` (one bit sequence per input) from the zero state and
    /// append termination sections back to the zero state. Returns one
    /// sequence per stream of the layout.
    pub fn encode(&self, inputs: &[Vec<u8>]) -> Result<Vec<Vec<u8>>> {
        if inputs.len() != self.num_inputs {
            return Err(Error::InvalidArgument(format!(
                "expected {} input sequences, got {}",
                self.num_inputs,
                inputs.len()
            )));
        }
        let n = inputs.first().map_or(0, |s| s.len());
        if inputs.iter().any(|s| s.len() != n) {
            return Err(Error::InvalidArgument("input sequences differ in length".into()));
        }
        let mut out = vec![Vec::with_capacity(n + self.memory); self.layout.len()];
        let mut state = 0u64;
        let step = |state: &mut u64, u: u64, out: &mut Vec<Vec<u8>>| {
            let (next, sym) = self.branch(*state, u);
            for (s, o) in out.iter_mut().enumerate() {
                o.push((sym >> s & 1) as u8);
            }
            *state = next;
        };
        for t in 0..n {
            let u = inputs
                .iter()
                .enumerate()
                .fold(0u64, |acc, (i, seq)| acc | (((seq[t] & 1) as u64) << i));
            step(&mut state, u, &mut out);
        }
        for u in self.termination_inputs(state)? {
            step(&mut state, u, &mut out);
        }
        assert_eq!(state, 0, "termination failed to reach the zero state");
        Ok(out)
    }
}
