use ndarray::Array2;

use super::GnnModel;
use crate::error::{Error, Result};
use crate::graph::{GraphBatch, PingGraph};
use crate::neural::{fit, DropoutStream, Hyperparameters, TrainOptions, TrainOutcome};

/// Full-graph training: every epoch runs the whole graph forward, takes the
/// MSE over nodes with `train_mask` set (indexed by node), and steps once.
/// Targets of the other nodes are never read.
pub fn train_transductive(
    model: GnnModel,
    g: &PingGraph,
    train_mask: &[bool],
    hp: &Hyperparameters,
    model_seed: u64,
    opts: TrainOptions,
) -> Result<TrainOutcome<GnnModel>> {
    hp.validate_architecture()?;
    if train_mask.len() != g.n_nodes() {
        return Err(Error::LengthMismatch {
            left: train_mask.len(),
            right: g.n_nodes(),
        });
    }
    let terms = train_mask.iter().filter(|&&m| m).count();
    if terms == 0 {
        return Err(Error::EmptyMask);
    }
    let trainable = model.trainable_mask(opts.freeze_scorer);
    let (model, loss_history) = fit(model, hp, Some(&trainable), 1, |m, epoch, _| {
        let stream = DropoutStream { model_seed, epoch };
        let (loss, grad) = m.loss_and_grad(g, train_mask, Some(stream))?;
        Ok(Some((loss * terms as f64, terms, grad)))
    })?;
    let loss_ids = g
        .node_global_ids()
        .iter()
        .zip(train_mask)
        .filter(|(_, &m)| m)
        .map(|(&id, _)| id)
        .collect();
    Ok(TrainOutcome {
        model,
        loss_history,
        loss_ids,
    })
}

/// Mini-batch-by-graph training. `sample_mask` is indexed by global sample
/// id. Each epoch visits the graphs in order and takes one optimizer step per
/// graph that holds training nodes. The epoch loss is the squared error summed
/// over all graphs divided by the number of training nodes.
pub fn train_batched(
    model: GnnModel,
    batch: &GraphBatch,
    sample_mask: &[bool],
    hp: &Hyperparameters,
    model_seed: u64,
    opts: TrainOptions,
) -> Result<TrainOutcome<GnnModel>> {
    hp.validate_architecture()?;
    if sample_mask.len() != batch.n_samples() {
        return Err(Error::LengthMismatch {
            left: sample_mask.len(),
            right: batch.n_samples(),
        });
    }
    let local_masks: Vec<Vec<bool>> = batch
        .graphs()
        .iter()
        .map(|g| g.node_global_ids().iter().map(|&id| sample_mask[id]).collect())
        .collect();
    let trainable = model.trainable_mask(opts.freeze_scorer);
    let (model, loss_history) = fit(model, hp, Some(&trainable), batch.graphs().len(), |m, epoch, unit| {
        let mask = &local_masks[unit];
        let terms = mask.iter().filter(|&&b| b).count();
        if terms == 0 {
            return Ok(None);
        }
        let stream = DropoutStream { model_seed, epoch };
        let (loss, grad) = m.loss_and_grad(&batch.graphs()[unit], mask, Some(stream))?;
        Ok(Some((loss * terms as f64, terms, grad)))
    })?;
    let mut loss_ids: Vec<usize> = batch
        .graphs()
        .iter()
        .zip(&local_masks)
        .flat_map(|(g, mask)| {
            g.node_global_ids()
                .iter()
                .zip(mask)
                .filter(|(_, &b)| b)
                .map(|(&id, _)| id)
                .collect::<Vec<_>>()
        })
        .collect();
    loss_ids.sort_unstable();
    Ok(TrainOutcome {
        model,
        loss_history,
        loss_ids,
    })
}

/// Evaluation-mode embeddings, one row per sample in global-id order.
pub fn extract_embeddings(model: &GnnModel, g: &PingGraph) -> Result<Array2<f64>> {
    let cache = model.forward(g, None)?;
    let mut out = Array2::zeros((g.n_nodes(), model.hidden_dim()));
    for (v, &id) in g.node_global_ids().iter().enumerate() {
        if id >= g.n_nodes() {
            return Err(Error::IndexOutOfRange {
                index: id,
                len: g.n_nodes(),
            });
        }
        out.row_mut(id).assign(&cache.embeddings.row(v));
    }
    Ok(out)
}

/// Like [`extract_embeddings`] across every graph of a batch.
pub fn extract_batch_embeddings(model: &GnnModel, batch: &GraphBatch) -> Result<Array2<f64>> {
    let mut out = Array2::zeros((batch.n_samples(), model.hidden_dim()));
    for g in batch.graphs() {
        let cache = model.forward(g, None)?;
        for (v, &id) in g.node_global_ids().iter().enumerate() {
            out.row_mut(id).assign(&cache.embeddings.row(v));
        }
    }
    Ok(out)
}
