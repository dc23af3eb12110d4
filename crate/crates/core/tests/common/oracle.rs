use num_traits::{One, Signed, Zero};
use sg_alg_core::arith::rational::Rational;
use sg_alg_core::game::MatrixGame;

// Independent oracle: exhaustive search over square submatrices with plain
// cofactor expansion, shifted so every entry is positive.

fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<Rational>> =
                m[1..].iter().map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
            let t = &m[0][j] * det(&minor);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum()
}

fn adjugate(m: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![Rational::one()]];
    }
    let mut adj = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<Rational>> = m
                .iter()
                .enumerate()
                .filter(|(r, _)| *r != i)
                .map(|(_, row)| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect())
                .collect();
            let d = det(&minor);
            adj[j][i] = if (i + j) % 2 == 0 { d } else { -d };
        }
    }
    adj
}

fn index_sets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m & (1 << i) != 0).collect())
        .collect()
}

/// Matrix game value by Shapley–Snow kernel enumeration.
pub fn oracle_value(a: &MatrixGame) -> Rational {
    let shift = Rational::one() - a.min_entry();
    let b: Vec<Vec<Rational>> = a.entries().iter().map(|r| r.iter().map(|x| x + &shift).collect()).collect();
    let (m, n) = (a.rows(), a.cols());
    for k in 1..=m.min(n) {
        for rows in index_sets(m, k) {
            for cols in index_sets(n, k) {
                let sub: Vec<Vec<Rational>> = rows.iter().map(|&i| cols.iter().map(|&j| b[i][j].clone()).collect()).collect();
                let adj = adjugate(&sub);
                let s: Rational = adj.iter().flatten().sum();
                if s.is_zero() {
                    continue;
                }
                let v = det(&sub) / &s;
                // Row strategy is 1^T adj / s, column strategy is adj 1 / s.
                let mut x = vec![Rational::zero(); m];
                let mut y = vec![Rational::zero(); n];
                for (c, &i) in rows.iter().enumerate() {
                    x[i] = (0..k).map(|r| &adj[r][c]).sum::<Rational>() / &s;
                }
                for (r, &j) in cols.iter().enumerate() {
                    y[j] = adj[r].iter().sum::<Rational>() / &s;
                }
                if x.iter().chain(&y).any(|p| p.is_negative()) {
                    continue;
                }
                let col_ok = (0..n).all(|j| (0..m).map(|i| &x[i] * &b[i][j]).sum::<Rational>() >= v);
                let row_ok = (0..m).all(|i| (0..n).map(|j| &b[i][j] * &y[j]).sum::<Rational>() <= v);
                if col_ok && row_ok {
                    return v - shift;
                }
            }
        }
    }
    unreachable!("every matrix game has a Shapley–Snow kernel")
}
