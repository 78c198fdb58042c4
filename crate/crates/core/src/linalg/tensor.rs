//! Index arithmetic over labelled tensor factors.

use alloc::vec;
use alloc::vec::Vec;

use super::{ComplexMatrix, SubsystemLayout, C64};
use crate::error::{Error, Result};

/// Groups every full basis index by the multi-index of the unselected
/// factors. `groups[rest][sel]` is the full index whose selected factors (in
/// the order given) read `sel` and whose remaining factors read `rest`.
fn split(layout: &SubsystemLayout, selected: &[usize]) -> Vec<Vec<usize>> {
    let dims = layout.dims();
    let sel_dim: usize = selected.iter().map(|&p| dims[p]).product();
    let rest_dim = layout.total_dim() / sel_dim;
    let mut groups = vec![vec![0usize; sel_dim]; rest_dim];
    let mut digits = vec![0usize; dims.len()];
    for full in 0..layout.total_dim() {
        let mut rem = full;
        for p in (0..dims.len()).rev() {
            digits[p] = rem % dims[p];
            rem /= dims[p];
        }
        let sel = selected.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
        let rest = (0..dims.len())
            .filter(|p| !selected.contains(p))
            .fold(0, |acc, p| acc * dims[p] + digits[p]);
        groups[rest][sel] = full;
    }
    groups
}

fn check_square(rho: &ComplexMatrix, layout: &SubsystemLayout) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::Shape(alloc::format!(
            "density matrix is {}x{}, not square",
            rho.rows(),
            rho.cols()
        )));
    }
    if rho.rows() != layout.total_dim() {
        return Err(Error::Shape(alloc::format!(
            "matrix dimension {} does not match layout dimension {}",
            rho.rows(),
            layout.total_dim()
        )));
    }
    Ok(())
}

/// Traces out every factor not named in `keep`. The result is ordered like
/// `layout.retain(keep)`.
pub fn partial_trace<S: AsRef<str>>(
    rho: &ComplexMatrix,
    layout: &SubsystemLayout,
    keep: &[S],
) -> Result<ComplexMatrix> {
    check_square(rho, layout)?;
    let mut kept = layout.positions_of(keep)?;
    kept.sort_unstable();
    let groups = split(layout, &kept);
    let k = groups[0].len();
    let mut out = vec![C64::new(0.0, 0.0); k * k];
    let src = rho.as_slice();
    let n = rho.cols();
    for group in &groups {
        for (a, &i) in group.iter().enumerate() {
            for (b, &j) in group.iter().enumerate() {
                out[a * k + b] += src[i * n + j];
            }
        }
    }
    Ok(ComplexMatrix::from_raw(k, k, out))
}

fn check_operator(op: &ComplexMatrix, layout: &SubsystemLayout, targets: &[usize]) -> Result<()> {
    let dim: usize = targets.iter().map(|&p| layout.factors()[p].dim).product();
    if !op.is_square() || op.rows() != dim {
        return Err(Error::Shape(alloc::format!(
            "operator is {}x{} but the target factors span dimension {dim}",
            op.rows(),
            op.cols()
        )));
    }
    Ok(())
}

/// Applies `op`, acting on the `targets` factors in the order given, to every
/// column of `m`.
fn apply_to_columns(m: &ComplexMatrix, groups: &[Vec<usize>], op: &ComplexMatrix) -> ComplexMatrix {
    let (rows, cols) = (m.rows(), m.cols());
    let k = op.rows();
    let src = m.as_slice();
    let ops = op.as_slice();
    let mut out = vec![C64::new(0.0, 0.0); rows * cols];
    let mut gathered = vec![C64::new(0.0, 0.0); k];
    for col in 0..cols {
        for group in groups {
            for (g, &i) in gathered.iter_mut().zip(group) {
                *g = src[i * cols + col];
            }
            for (r, &i) in group.iter().enumerate() {
                out[i * cols + col] = ops[r * k..(r + 1) * k]
                    .iter()
                    .zip(&gathered)
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
    }
    ComplexMatrix::from_raw(rows, cols, out)
}

/// `op |ψ⟩` with `op` acting on the named factors.
pub fn apply_to_vector<S: AsRef<str>>(
    psi: &ComplexMatrix,
    layout: &SubsystemLayout,
    targets: &[S],
    op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    if !psi.is_column() || psi.rows() != layout.total_dim() {
        return Err(Error::Shape(alloc::format!(
            "state vector of length {} does not match layout dimension {}",
            psi.rows() * psi.cols(),
            layout.total_dim()
        )));
    }
    let targets = layout.positions_of(targets)?;
    check_operator(op, layout, &targets)?;
    Ok(apply_to_columns(psi, &split(layout, &targets), op))
}

/// `op ρ op†` with `op` acting on the named factors.
pub fn apply_to_density<S: AsRef<str>>(
    rho: &ComplexMatrix,
    layout: &SubsystemLayout,
    targets: &[S],
    op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    check_square(rho, layout)?;
    let targets = layout.positions_of(targets)?;
    check_operator(op, layout, &targets)?;
    let groups = split(layout, &targets);
    let left = apply_to_columns(rho, &groups, op);
    Ok(apply_to_columns(&left.dagger(), &groups, op).dagger())
}

/// Full-space matrix of `op` acting on the named factors, identity elsewhere.
pub fn embed_operator<S: AsRef<str>>(
    layout: &SubsystemLayout,
    targets: &[S],
    op: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let targets = layout.positions_of(targets)?;
    check_operator(op, layout, &targets)?;
    let id = ComplexMatrix::identity(layout.total_dim());
    Ok(apply_to_columns(&id, &split(layout, &targets), op))
}

/// For each index of the permuted layout, the index it came from.
fn permutation_map(layout: &SubsystemLayout, order: &[usize]) -> Vec<usize> {
    let dims = layout.dims();
    let n = layout.total_dim();
    let mut strides = vec![1usize; dims.len()];
    for p in (0..dims.len().saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * dims[p + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
    (0..n)
        .map(|new| {
            let mut rem = new;
            let mut old = 0;
            for q in (0..order.len()).rev() {
                old += (rem % new_dims[q]) * strides[order[q]];
                rem /= new_dims[q];
            }
            old
        })
        .collect()
}

fn reorder<S: AsRef<str>>(
    layout: &SubsystemLayout,
    new_order: &[S],
) -> Result<(SubsystemLayout, Vec<usize>)> {
    let order = layout.positions_of(new_order)?;
    if order.len() != layout.len() {
        return Err(Error::Label(
            "a permutation must list every factor exactly once".into(),
        ));
    }
    let permuted = SubsystemLayout::new(
        order
            .iter()
            .map(|&p| (layout.factors()[p].label.clone(), layout.factors()[p].dim)),
    )?;
    Ok((permuted, permutation_map(layout, &order)))
}

/// Reorders the factors of a state vector.
pub fn permute_vector<S: AsRef<str>>(
    psi: &ComplexMatrix,
    layout: &SubsystemLayout,
    new_order: &[S],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    if !psi.is_column() || psi.rows() != layout.total_dim() {
        return Err(Error::Shape("state vector does not match layout".into()));
    }
    let (permuted, map) = reorder(layout, new_order)?;
    let src = psi.as_slice();
    let data = map.iter().map(|&old| src[old]).collect();
    Ok((ComplexMatrix::from_raw(psi.rows(), 1, data), permuted))
}

/// Reorders the factors of a density matrix.
pub fn permute_density<S: AsRef<str>>(
    rho: &ComplexMatrix,
    layout: &SubsystemLayout,
    new_order: &[S],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    check_square(rho, layout)?;
    let (permuted, map) = reorder(layout, new_order)?;
    let n = rho.rows();
    let src = rho.as_slice();
    let mut data = Vec::with_capacity(n * n);
    for &r in &map {
        for &c in &map {
            data.push(src[r * n + c]);
        }
    }
    Ok((ComplexMatrix::from_raw(n, n, data), permuted))
}
