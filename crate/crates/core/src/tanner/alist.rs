//! MacKay alist text format.
//!
//! ```text
//! n m
//! max_var_degree max_check_degree
//! var degrees (n entries)
//! check degrees (m entries)
//! n lines: 1-indexed checks of each variable
//! m lines: 1-indexed variables of each check
//! ```
//!
//! Zero entries are treated as padding, as in files produced for irregular
//! codes, but the graph itself must be regular.

use std::collections::BTreeSet;

use super::{CodeParams, TannerGraph};
use crate::error::{Error, Result};

pub fn write_alist(g: &TannerGraph) -> String {
    let mut out = String::new();
    let join = |it: &mut dyn Iterator<Item = usize>| {
        it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    out.push_str(&format!("{} {}\n", g.n(), g.m()));
    out.push_str(&format!("{} {}\n", g.gamma(), g.rho()));
    out.push_str(&join(&mut std::iter::repeat_n(g.gamma(), g.n())));
    out.push('\n');
    out.push_str(&join(&mut std::iter::repeat_n(g.rho(), g.m())));
    out.push('\n');
    for v in 0..g.n() {
        out.push_str(&join(&mut g.var_checks(v).iter().map(|&c| c as usize + 1)));
        out.push('\n');
    }
    for c in 0..g.m() {
        out.push_str(&join(&mut g.check_vars(c).iter().map(|&v| v as usize + 1)));
        out.push('\n');
    }
    out
}

struct Token {
    value: usize,
    line: usize,
    column: usize,
}

struct Lines {
    rows: Vec<Vec<Token>>,
    next: usize,
    last_line: usize,
}

impl Lines {
    fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut last_line = 0;
        for (i, line) in text.lines().enumerate() {
            last_line = i + 1;
            let mut row = Vec::new();
            let mut offset = 0;
            for piece in line.split_whitespace() {
                let column = line[offset..].find(piece).unwrap() + offset + 1;
                offset = column - 1 + piece.len();
                let value = piece.parse::<usize>().map_err(|_| Error::Parse {
                    line: i + 1,
                    column,
                    msg: format!("expected a non-negative integer, found `{piece}`"),
                })?;
                row.push(Token {
                    value,
                    line: i + 1,
                    column,
                });
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
        Ok(Self {
            rows,
            next: 0,
            last_line,
        })
    }

    fn next_row(&mut self, what: &str) -> Result<&[Token]> {
        let row = self.rows.get(self.next).ok_or_else(|| Error::Parse {
            line: self.last_line + 1,
            column: 1,
            msg: format!("unexpected end of input, expected {what}"),
        })?;
        self.next += 1;
        Ok(row)
    }

    fn fixed(&mut self, count: usize, what: &str) -> Result<Vec<usize>> {
        let row = self.next_row(what)?;
        if row.len() != count {
            let t = row.get(count.min(row.len().saturating_sub(1))).unwrap();
            return Err(Error::Parse {
                line: t.line,
                column: t.column,
                msg: format!("expected {count} entries for {what}, found {}", row.len()),
            });
        }
        Ok(row.iter().map(|t| t.value).collect())
    }
}

/// Parses an alist document into a regular Tanner graph.
pub fn read_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = Lines::parse(text)?;
    let header = lines.fixed(2, "`n m` header")?;
    let (n, m) = (header[0], header[1]);
    let maxes = lines.fixed(2, "maximum degrees")?;
    let var_deg = lines.fixed(n, "variable degrees")?;
    let check_deg = lines.fixed(m, "check degrees")?;

    if n == 0 || m == 0 {
        return Err(Error::DegreeInconsistency("empty graph".into()));
    }
    let gamma = maxes[0];
    let rho = maxes[1];
    if let Some((v, d)) = var_deg.iter().enumerate().find(|(_, &d)| d != gamma) {
        return Err(Error::DegreeInconsistency(format!(
            "variable {} declares degree {d}, expected regular degree {gamma}",
            v + 1
        )));
    }
    if let Some((c, d)) = check_deg.iter().enumerate().find(|(_, &d)| d != rho) {
        return Err(Error::DegreeInconsistency(format!(
            "check {} declares degree {d}, expected regular degree {rho}",
            c + 1
        )));
    }

    let mut from_vars = BTreeSet::new();
    for v in 0..n {
        let row = lines.next_row("variable neighbor list")?;
        let listed: Vec<&Token> = row.iter().filter(|t| t.value != 0).collect();
        if listed.len() != var_deg[v] {
            return Err(Error::DegreeInconsistency(format!(
                "variable {} declares degree {} but lists {} checks (line {})",
                v + 1,
                var_deg[v],
                listed.len(),
                row[0].line
            )));
        }
        for t in listed {
            if t.value > m {
                return Err(Error::Parse {
                    line: t.line,
                    column: t.column,
                    msg: format!("check index {} exceeds m = {m}", t.value),
                });
            }
            if !from_vars.insert((v, t.value - 1)) {
                return Err(Error::DegreeInconsistency(format!(
                    "duplicate edge between variable {} and check {}",
                    v + 1,
                    t.value
                )));
            }
        }
    }

    let mut from_checks = BTreeSet::new();
    for c in 0..m {
        let row = lines.next_row("check neighbor list")?;
        let listed: Vec<&Token> = row.iter().filter(|t| t.value != 0).collect();
        if listed.len() != check_deg[c] {
            return Err(Error::DegreeInconsistency(format!(
                "check {} declares degree {} but lists {} variables (line {})",
                c + 1,
                check_deg[c],
                listed.len(),
                row[0].line
            )));
        }
        for t in listed {
            if t.value > n {
                return Err(Error::Parse {
                    line: t.line,
                    column: t.column,
                    msg: format!("variable index {} exceeds n = {n}", t.value),
                });
            }
            from_checks.insert((t.value - 1, c));
        }
    }
    if let Some(row) = lines.rows.get(lines.next) {
        return Err(Error::Parse {
            line: row[0].line,
            column: row[0].column,
            msg: "trailing data after check lists".into(),
        });
    }
    if from_vars != from_checks {
        return Err(Error::DegreeInconsistency(
            "variable and check neighbor lists describe different edge sets".into(),
        ));
    }
    if n * gamma != m * rho {
        return Err(Error::DegreeInconsistency(format!(
            "n*gamma = {} but m*rho = {}",
            n * gamma,
            m * rho
        )));
    }
    let params = CodeParams::new(n, gamma, rho)?;
    let edges: Vec<(usize, usize)> = from_vars.into_iter().collect();
    TannerGraph::from_edges(params, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tanner::{build_random_regular, Word};

    // Six variables, four checks, gamma = 2, rho = 3.
    const HAND: &str = "6 4
2 3
2 2 2 2 2 2
3 3 3 3
1 2
1 3
1 4
2 3
2 4
3 4
1 2 3
1 4 5
2 4 6
3 5 6
";

    #[test]
    fn hand_written_alist_has_enumerated_kernel() {
        let g = read_alist(HAND).unwrap();
        assert_eq!((g.n(), g.m(), g.gamma(), g.rho()), (6, 4, 2, 3));
        // c1 = x1+x2+x3, c2 = x1+x4+x5, c3 = x2+x4+x6, c4 = x3+x5+x6
        let checks = [[0, 1, 2], [0, 3, 4], [1, 3, 5], [2, 4, 5]];
        let mut accepted = 0;
        for mask in 0u32..64 {
            let w = Word::from_bits((0..6).map(|i| ((mask >> i) & 1) as u8));
            let expected = checks
                .iter()
                .all(|c| c.iter().map(|&i| w.get(i)).sum::<u8>() % 2 == 0);
            assert_eq!(g.is_codeword(&w).unwrap(), expected, "mask {mask:06b}");
            accepted += expected as usize;
        }
        // rank(H) = 3 (the four rows sum to zero), so the kernel has 2^3 words.
        assert_eq!(accepted, 8);
    }

    #[test]
    fn round_trip_preserves_edges() {
        for seed in 0..5 {
            let g = build_random_regular(CodeParams::new(24, 3, 6).unwrap(), seed).unwrap();
            let back = read_alist(&write_alist(&g)).unwrap();
            assert_eq!(back.edges(), g.edges());
            assert_eq!(back, g);
        }
    }

    #[test]
    fn wrong_declared_degree_is_rejected() {
        let bad = HAND.replacen("2 2 2 2 2 2", "2 2 3 2 2 2", 1);
        assert!(matches!(
            read_alist(&bad),
            Err(Error::DegreeInconsistency(_))
        ));
        let bad = HAND.replacen("1 4 5\n", "1 4 6\n", 1);
        assert!(matches!(
            read_alist(&bad),
            Err(Error::DegreeInconsistency(_))
        ));
    }

    #[test]
    fn malformed_token_reports_position() {
        let bad = HAND.replacen("1 2\n1 3\n", "1 2\n1 x\n", 1);
        match read_alist(&bad) {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!((line, column), (6, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
        match read_alist("6 4\n2 3\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
