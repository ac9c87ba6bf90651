//! Client sharding and aggregator-set carving.
//!
//! All functions are pure in `(data, parameters, seed)`. Output datasets keep
//! the relative order of the input samples.

use rand::seq::SliceRandom;

use super::Dataset;
use crate::{seed, Error, Result};

/// Shards `data` so every client sees exactly one demographic group.
///
/// Clients are assigned to groups in contiguous blocks: group `g` gets
/// clients `ceil(m·F_{g-1}) .. ceil(m·F_g)` where `F` is the cumulative sum
/// of `group_client_fractions`. Each group's samples are shuffled and dealt
/// over its clients in near-equal contiguous chunks.
pub fn partition_heterogeneous(
    data: &Dataset,
    num_clients: usize,
    group_client_fractions: &[f64],
    seed: u64,
) -> Result<Vec<Dataset>> {
    let s = data.num_groups();
    if group_client_fractions.len() != s {
        return Err(Error::Partition(format!(
            "expected {s} group fractions, got {}",
            group_client_fractions.len()
        )));
    }
    if group_client_fractions
        .iter()
        .any(|f| !(0.0..=1.0).contains(f))
    {
        return Err(Error::Partition(
            "group fractions must lie in [0, 1]".into(),
        ));
    }
    let total: f64 = group_client_fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Partition(format!(
            "group fractions sum to {total}, expected 1"
        )));
    }
    if num_clients < s {
        return Err(Error::Partition(format!(
            "{num_clients} clients cannot host {s} groups one group per client"
        )));
    }
    let by_group = data.indices_by_group();
    if let Some(g) = by_group.iter().position(Vec::is_empty) {
        return Err(Error::Partition(format!("group {g} has no samples")));
    }

    let mut bounds = Vec::with_capacity(s + 1);
    bounds.push(0usize);
    let mut cumulative = 0.0;
    for (g, f) in group_client_fractions.iter().enumerate() {
        cumulative += f;
        let b = if g + 1 == s {
            num_clients
        } else {
            ((cumulative * num_clients as f64 - 1e-9).ceil() as usize).min(num_clients)
        };
        bounds.push(b.max(*bounds.last().unwrap()));
    }

    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); num_clients];
    for (g, mut idx) in by_group.into_iter().enumerate() {
        let clients: Vec<usize> = (bounds[g]..bounds[g + 1]).collect();
        if clients.is_empty() {
            return Err(Error::Partition(format!(
                "group {g} receives no clients under fractions {group_client_fractions:?}"
            )));
        }
        if idx.len() < clients.len() {
            return Err(Error::Partition(format!(
                "group {g} has {} samples for {} clients",
                idx.len(),
                clients.len()
            )));
        }
        idx.shuffle(&mut seed::rng(seed, &[g as u64]));
        deal_chunks(&idx, &clients, &mut shards);
    }
    build(data, shards)
}

/// Shards `data` so every client holds every group in roughly global
/// proportions.
pub fn partition_homogeneous(
    data: &Dataset,
    num_clients: usize,
    seed: u64,
) -> Result<Vec<Dataset>> {
    if num_clients == 0 {
        return Err(Error::Partition("need at least one client".into()));
    }
    let by_group = data.indices_by_group();
    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); num_clients];
    // Round-robin with a cursor carried across groups keeps shard sizes
    // within one sample of each other overall.
    let mut cursor = 0usize;
    for (g, mut idx) in by_group.into_iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        if idx.len() < num_clients {
            return Err(Error::Partition(format!(
                "group {g} has {} samples, fewer than {num_clients} clients",
                idx.len()
            )));
        }
        idx.shuffle(&mut seed::rng(seed, &[g as u64]));
        for i in idx {
            shards[cursor % num_clients].push(i);
            cursor += 1;
        }
    }
    build(data, shards)
}

/// Splits off an aggregator set of about `fraction · |data|` samples,
/// stratified by `(group, label)` so every group and every label present in
/// `data` is represented. Returns `(train, agg)`.
pub fn split_aggregator_set(
    data: &Dataset,
    fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Split(format!("fraction {fraction} outside (0, 1)")));
    }
    let counts = data.group_counts();
    if let Some(g) = counts.iter().position(|&c| c < 2) {
        return Err(Error::Split(format!(
            "group {g} has {} samples; need at least 2 to cover both sides",
            counts[g]
        )));
    }
    let cells = data.cell_counts();
    for label in 0..2 {
        if cells.iter().all(|c| c[label] == 0) {
            return Err(Error::Split(format!("no sample carries label {label}")));
        }
    }

    // Largest-remainder apportionment of round(fraction·N) over the cells.
    let flat: Vec<(usize, usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(g, c)| [(g, 0, c[0]), (g, 1, c[1])])
        .collect();
    let target = (fraction * data.len() as f64).round() as usize;
    let exact: Vec<f64> = flat.iter().map(|&(_, _, n)| fraction * n as f64).collect();
    let mut take: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..flat.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut missing = target.saturating_sub(take.iter().sum());
    for &c in order.iter().cycle().take(order.len() * 2) {
        if missing == 0 {
            break;
        }
        if take[c] < flat[c].2 {
            take[c] += 1;
            missing -= 1;
        }
    }

    // Coverage: each group and each label needs one aggregator sample, and
    // each group must keep one sample on the training side.
    for (g, &count) in counts.iter().enumerate() {
        let cells_of_g = [2 * g, 2 * g + 1];
        if cells_of_g.iter().all(|&c| take[c] == 0) {
            let c = *cells_of_g
                .iter()
                .max_by_key(|&&c| (flat[c].2, usize::MAX - c))
                .unwrap();
            take[c] = 1;
        }
        let in_agg: usize = cells_of_g.iter().map(|&c| take[c]).sum();
        if in_agg == count {
            let c = *cells_of_g
                .iter()
                .max_by_key(|&&c| (take[c], usize::MAX - c))
                .unwrap();
            take[c] -= 1;
        }
    }
    for label in 0..2 {
        let cells_of_label: Vec<usize> = (0..flat.len()).filter(|&c| flat[c].1 == label).collect();
        if cells_of_label.iter().all(|&c| take[c] == 0) {
            let c = *cells_of_label
                .iter()
                .filter(|&&c| flat[c].2 > take[c] && counts[flat[c].0] > take[c] + take[c ^ 1] + 1)
                .max_by_key(|&&c| (flat[c].2, usize::MAX - c))
                .ok_or_else(|| {
                    Error::Split(format!("cannot place label {label} in the aggregator set"))
                })?;
            take[c] += 1;
        }
    }

    let mut by_cell: Vec<Vec<usize>> = vec![Vec::new(); flat.len()];
    for (i, s) in data.samples().iter().enumerate() {
        by_cell[2 * s.group + s.label as usize].push(i);
    }
    let mut agg_idx = Vec::with_capacity(target);
    for (c, mut idx) in by_cell.into_iter().enumerate() {
        idx.shuffle(&mut seed::rng(seed, &[c as u64]));
        agg_idx.extend_from_slice(&idx[..take[c]]);
    }
    agg_idx.sort_unstable();
    let mut in_agg = vec![false; data.len()];
    for &i in &agg_idx {
        in_agg[i] = true;
    }
    let train_idx: Vec<usize> = (0..data.len()).filter(|&i| !in_agg[i]).collect();
    if train_idx.is_empty() {
        return Err(Error::Split("no samples left for training".into()));
    }
    Ok((data.subset(&train_idx)?, data.subset(&agg_idx)?))
}

fn deal_chunks(idx: &[usize], clients: &[usize], shards: &mut [Vec<usize>]) {
    let k = clients.len();
    let base = idx.len() / k;
    let extra = idx.len() % k;
    let mut start = 0;
    for (j, &c) in clients.iter().enumerate() {
        let len = base + usize::from(j < extra);
        shards[c].extend_from_slice(&idx[start..start + len]);
        start += len;
    }
}

fn build(data: &Dataset, shards: Vec<Vec<usize>>) -> Result<Vec<Dataset>> {
    shards
        .into_iter()
        .enumerate()
        .map(|(c, mut idx)| {
            if idx.is_empty() {
                return Err(Error::Partition(format!("client {c} received no samples")));
            }
            idx.sort_unstable();
            data.subset(&idx)
        })
        .collect()
}
