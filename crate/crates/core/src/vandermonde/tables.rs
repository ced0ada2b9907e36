use num_traits::ToPrimitive;
use rayon::prelude::*;

use super::{KahanSum, VandermondeDist};
use crate::experiment::schema_line;
use crate::Result;

pub const TABLE_KAPPAS: [u64; 5] = [100, 500, 1000, 2000, 5000];
pub const TABLE_RHOS: [u64; 5] = [10, 20, 30, 40, 50];

/// Published distance column, which is on the `Σ|p - q|` scale.
/// Rows follow [`TABLE_RHOS`], columns [`TABLE_KAPPAS`].
const REFERENCE_L1: [[f64; 5]; 5] = [
    [0.0472, 0.0090, 0.0045, 0.0022, 0.0009],
    [0.1041, 0.0190, 0.0094, 0.0047, 0.0019],
    [0.1685, 0.0292, 0.0144, 0.0071, 0.0028],
    [0.2422, 0.0396, 0.194, 0.0096, 0.0038],
    [0.3286, 0.0502, 0.0245, 0.0121, 0.0048],
];

const REFERENCE_ABS_RANK: [[f64; 5]; 5] = [
    [0.1603, 0.1667, 0.1674, 0.1678, 0.1680],
    [0.1100, 0.1200, 0.1212, 0.1218, 0.1222],
    [0.0848, 0.0979, 0.0994, 0.1002, 0.1006],
    [0.0683, 0.0843, 0.0861, 0.0870, 0.0875],
    [0.0559, 0.0748, 0.0769, 0.0778, 0.0784],
];

/// The published distance cell that looks like a dropped digit; compared
/// values are reported as flagged rather than pass or fail.
pub const SUSPECT_CELL: (u64, u64) = (1000, 40);

fn cell(kappa: u64, rho: u64) -> Option<(usize, usize)> {
    let r = TABLE_RHOS.iter().position(|&x| x == rho)?;
    let k = TABLE_KAPPAS.iter().position(|&x| x == kappa)?;
    Some((r, k))
}

pub fn reference_l1(kappa: u64, rho: u64) -> Option<f64> {
    cell(kappa, rho).map(|(r, k)| REFERENCE_L1[r][k])
}

pub fn reference_abs_rank(kappa: u64, rho: u64) -> Option<f64> {
    cell(kappa, rho).map(|(r, k)| REFERENCE_ABS_RANK[r][k])
}

/// All 25 `(kappa, rho)` cells, row by row in `rho`.
pub fn table_grid() -> Vec<(u64, u64)> {
    TABLE_RHOS
        .iter()
        .flat_map(|&r| TABLE_KAPPAS.iter().map(move |&k| (k, r)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub kappa: u64,
    pub rho: u64,
    pub tv: f64,
    pub l1: f64,
    pub e_abs_rank: f64,
}

/// One cell. With `exact`, the mass function and `E|X|` come from rational
/// arithmetic; the limit side is always quadrature.
pub fn table_row(kappa: u64, rho: u64, exact: bool) -> Result<TableRow> {
    let d = VandermondeDist::new(kappa, rho)?;
    let (pmf, e_abs_rank) = if exact {
        let k = kappa as i64;
        let pmf = (-k..=k)
            .map(|i| Ok(d.pmf_exact(i)?.to_f64().unwrap_or(0.0)))
            .collect::<Result<Vec<f64>>>()?;
        (
            pmf,
            d.expected_abs_rank_exact().to_f64().unwrap_or(f64::NAN),
        )
    } else {
        (d.pmf_vec(), d.expected_abs_rank())
    };
    let q = d.discretized_limit();
    let l1: KahanSum = pmf.iter().zip(&q).map(|(p, q)| (p - q).abs()).collect();
    let l1 = l1.total();
    Ok(TableRow {
        kappa,
        rho,
        tv: 0.5 * l1,
        l1,
        e_abs_rank,
    })
}

pub fn table_rows(grid: &[(u64, u64)], exact: bool) -> Result<Vec<TableRow>> {
    grid.par_iter()
        .map(|&(k, r)| table_row(k, r, exact))
        .collect()
}

/// CSV with columns `kappa,rho,tv,e_abs_rank,l1`, four decimals.
pub fn emit_tables(grid: &[(u64, u64)]) -> Result<String> {
    Ok(rows_csv(&table_rows(grid, false)?))
}

pub fn rows_csv(rows: &[TableRow]) -> String {
    let mut out = schema_line("vandermonde-table");
    out.push_str("kappa,rho,tv,e_abs_rank,l1\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{:.4},{:.4},{:.4}\n",
            r.kappa, r.rho, r.tv, r.e_abs_rank, r.l1
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Pass,
    Fail,
    Flagged,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Pass => "pass",
            CellStatus::Fail => "fail",
            CellStatus::Flagged => "flagged",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellComparison {
    pub row: TableRow,
    pub ours: f64,
    pub reference: f64,
    pub abs_diff: f64,
    pub status: CellStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    /// Distance table.
    B1,
    /// Expected absolute rank table.
    B2,
}

/// Compares computed cells against the published tables. For the distance
/// table the published values are on the `Σ|p - q|` scale, so `l1` is used.
pub fn compare(kind: TableKind, rows: &[TableRow], tol: f64) -> Vec<CellComparison> {
    rows.iter()
        .filter_map(|row| {
            let (ours, reference) = match kind {
                TableKind::B1 => (row.l1, reference_l1(row.kappa, row.rho)?),
                TableKind::B2 => (row.e_abs_rank, reference_abs_rank(row.kappa, row.rho)?),
            };
            let abs_diff = (ours - reference).abs();
            let status = if kind == TableKind::B1 && (row.kappa, row.rho) == SUSPECT_CELL {
                CellStatus::Flagged
            } else if abs_diff <= tol {
                CellStatus::Pass
            } else {
                CellStatus::Fail
            };
            Some(CellComparison {
                row: *row,
                ours,
                reference,
                abs_diff,
                status,
            })
        })
        .collect()
}

pub fn comparison_csv(kind: TableKind, cells: &[CellComparison]) -> String {
    let mut out = match kind {
        TableKind::B1 => {
            let mut s = schema_line("tables-b1");
            s.push_str("kappa,rho,tv,l1,published,abs_diff,status\n");
            s
        }
        TableKind::B2 => {
            let mut s = schema_line("tables-b2");
            s.push_str("kappa,rho,e_abs_rank,published,abs_diff,status\n");
            s
        }
    };
    for c in cells {
        let r = &c.row;
        match kind {
            TableKind::B1 => out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{:.4},{}\n",
                r.kappa,
                r.rho,
                r.tv,
                r.l1,
                c.reference,
                c.abs_diff,
                c.status.as_str()
            )),
            TableKind::B2 => out.push_str(&format!(
                "{},{},{:.4},{:.4},{:.4},{}\n",
                r.kappa,
                r.rho,
                r.e_abs_rank,
                c.reference,
                c.abs_diff,
                c.status.as_str()
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape() {
        let g = table_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], (100, 10));
        assert_eq!(g[24], (5000, 50));
    }

    #[test]
    fn empty_grid_is_header_only() {
        let csv = emit_tables(&[]).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("kappa,rho"));
    }

    #[test]
    fn small_cell_csv() {
        let csv = emit_tables(&[(100, 10)]).unwrap();
        let row = csv.lines().nth(2).unwrap();
        assert!(row.starts_with("100,10,0.0236,0.1603,"), "{row}");
        let l1: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((l1 - 0.0472).abs() <= 5e-4);
    }

    #[test]
    fn exact_path_agrees() {
        let a = table_row(100, 10, false).unwrap();
        let b = table_row(100, 10, true).unwrap();
        assert!((a.e_abs_rank - b.e_abs_rank).abs() < 1e-12);
        assert!((a.l1 - b.l1).abs() < 1e-10);
    }

    #[test]
    fn suspect_cell_is_flagged() {
        let row = table_row(1000, 40, false).unwrap();
        let cmp = compare(TableKind::B1, &[row], 0.005);
        assert_eq!(cmp[0].status, CellStatus::Flagged);
        assert!((row.l1 - 0.0194).abs() < 5e-4);
    }
}
