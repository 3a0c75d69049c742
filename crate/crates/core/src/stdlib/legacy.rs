//! Plain numeric routines with no knowledge of the op engine. They are
//! exposed as ops only through `legacy-ops.yaml` and the generic wrappers
//! in `wrap`.

pub fn reverse(values: Vec<f64>) -> Vec<f64> {
    values.into_iter().rev().collect()
}

pub fn sum(values: Vec<f64>) -> f64 {
    values.iter().sum()
}

/// `rows[r][c]` becomes `out[c][r]`. Rows must have equal length.
pub fn transpose(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    (0..cols).map(|c| rows.iter().map(|row| row[c]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_behaviour() {
        assert_eq!(reverse(vec![1.0, 2.0, 3.0]), vec![3.0, 2.0, 1.0]);
        assert_eq!(sum(vec![1.0, 2.0, 3.0]), 6.0);
        assert_eq!(
            transpose(vec![vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]),
            vec![vec![1.0, 4.0], vec![2.0, 5.0], vec![3.0, 6.0]]
        );
        assert!(transpose(vec![]).is_empty());
    }
}
