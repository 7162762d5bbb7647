//! User-defined strategies for `cftm axioms`.
//!
//! ```text
//! kind: f1
//! name: clipped-sum
//! expr: math::min(1, mu + delta)
//! ```
//!
//! F1 expressions see `mu`, `delta` and `t`. F2 expressions see `n`, `sum`,
//! `prod`, `min` and `max` over the candidate multiset (`min` and `max` are 0
//! for the empty set). Evaluation errors yield NaN, which fails the range
//! check.

use std::sync::Arc;

use anyhow::{anyhow, bail, Context as _, Result};
use evalexpr::{
    build_operator_tree, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Node, Value,
};

use cftm::{F1Strategy, F2Strategy};

#[derive(Clone, Debug)]
pub enum CustomStrategy {
    F1(F1Strategy),
    F2(F2Strategy),
}

pub fn parse_strategy_file(text: &str) -> Result<CustomStrategy> {
    let (mut kind, mut name, mut expr) = (None, None, None);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .ok_or_else(|| anyhow!("line {}: expected `key: value`", i + 1))?;
        let value = value.trim().to_owned();
        match key.trim() {
            "kind" => kind = Some(value),
            "name" => name = Some(value),
            "expr" => expr = Some(value),
            other => bail!("line {}: unknown key `{other}`", i + 1),
        }
    }
    let kind = kind.ok_or_else(|| anyhow!("missing `kind:`"))?;
    let expr = expr.ok_or_else(|| anyhow!("missing `expr:`"))?;
    let name = name.unwrap_or_else(|| expr.clone());
    let tree: Arc<Node<DefaultNumericTypes>> =
        Arc::new(build_operator_tree(&expr).with_context(|| format!("bad expression `{expr}`"))?);

    match kind.as_str() {
        "f1" => Ok(CustomStrategy::F1(F1Strategy::custom(name, move |mu, delta, t| {
            eval(&tree, &[("mu", mu), ("delta", delta), ("t", t as f64)])
        }))),
        "f2" => Ok(CustomStrategy::F2(F2Strategy::custom(name, move |values: &[f64]| {
            let (lo, hi) = if values.is_empty() {
                (0.0, 0.0)
            } else {
                (values.iter().cloned().fold(f64::INFINITY, f64::min), values.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            };
            eval(
                &tree,
                &[
                    ("n", values.len() as f64),
                    ("sum", values.iter().sum()),
                    ("prod", values.iter().product()),
                    ("min", lo),
                    ("max", hi),
                ],
            )
        }))),
        other => bail!("kind must be f1 or f2, got `{other}`"),
    }
}

fn eval(tree: &Node<DefaultNumericTypes>, vars: &[(&str, f64)]) -> f64 {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    for &(k, v) in vars {
        if ctx.set_value(k.to_owned(), Value::Float(v)).is_err() {
            return f64::NAN;
        }
    }
    tree.eval_number_with_context(&ctx).unwrap_or(f64::NAN)
}
