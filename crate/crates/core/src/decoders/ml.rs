use super::{DecodeResult, DecodeStatus};
use crate::channels::ReceivedWord;
use crate::error::{Error, Result};
use crate::factor_graph::ParityCheckMatrix;
use crate::gf2::BitMatrix;

/// Maximum-likelihood erasure decoding by solving `H_E x_E = H_K x_K` over GF(2).
///
/// Positions that are determined uniquely are filled in even when the system
/// is underdetermined; the residual is then the dimension of the solution space.
pub fn ml_erasure_decode(h: &ParityCheckMatrix, rw: &ReceivedWord) -> Result<DecodeResult> {
    let r = rw.as_discrete()?;
    if r.len() != h.cols() {
        return Err(Error::LengthMismatch {
            expected: h.cols(),
            actual: r.len(),
        });
    }
    let erased: Vec<usize> = (0..r.len()).filter(|&i| r[i] == 0).collect();
    let mut col_of = vec![usize::MAX; r.len()];
    for (k, &i) in erased.iter().enumerate() {
        col_of[i] = k;
    }
    let u = erased.len();
    let mut m = BitMatrix::zeros(h.rows(), u + 1);
    for row in 0..h.rows() {
        for &j in h.row(row) {
            if r[j] == 0 {
                m.set(row, col_of[j], true);
            } else if r[j] == -1 {
                m.flip(row, u);
            }
        }
    }
    let pivots = m.rref();
    if let Some((row, _)) = pivots.iter().enumerate().find(|(_, &c)| c == u) {
        return Err(Error::Inconsistent { check: row });
    }
    let mut word = r.to_vec();
    for (row, &c) in pivots.iter().enumerate() {
        // determined iff no free variable appears in the pivot row
        let ones = m.row_ones(row);
        if ones.iter().all(|&j| j == c || j == u) {
            word[erased[c]] = if m.get(row, u) { -1 } else { 1 };
        }
    }
    let residual = u - pivots.len();
    Ok(DecodeResult {
        word,
        status: if residual == 0 {
            DecodeStatus::Success
        } else {
            DecodeStatus::Stall
        },
        iterations: 0,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelModel;

    #[test]
    fn solves_and_reports_ambiguity() {
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0], vec![0, 1, 1]]).unwrap();
        let rw = ReceivedWord::discrete(vec![-1, 0, 0], ChannelModel::Bec(0.5));
        let d = ml_erasure_decode(&h, &rw).unwrap();
        assert_eq!(
            (d.word, d.status),
            (vec![-1, -1, -1], DecodeStatus::Success)
        );
        // the all-erased word covers the codeword (1,1,1)
        let rw = ReceivedWord::discrete(vec![0, 0, 0], ChannelModel::Bec(0.5));
        let d = ml_erasure_decode(&h, &rw).unwrap();
        assert_eq!((d.status, d.residual), (DecodeStatus::Stall, 1));
        let rw = ReceivedWord::discrete(vec![1, -1, 0], ChannelModel::Bec(0.5));
        assert!(matches!(
            ml_erasure_decode(&h, &rw),
            Err(Error::Inconsistent { .. })
        ));
    }

    #[test]
    fn partial_determination() {
        // x0 + x1 = 0, x2 + x3 = 0 with x0..x2 erased and x3 known
        let h = ParityCheckMatrix::from_dense(&[vec![1, 1, 0, 0], vec![0, 0, 1, 1]]).unwrap();
        let rw = ReceivedWord::discrete(vec![0, 0, 0, -1], ChannelModel::Bec(0.5));
        let d = ml_erasure_decode(&h, &rw).unwrap();
        assert_eq!(d.word, vec![0, 0, -1, -1]);
        assert_eq!(d.residual, 1);
    }
}
