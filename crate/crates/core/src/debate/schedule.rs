use std::collections::HashMap;

use super::{DebateError, Rebuttal};

/// Re-sorts `base_order` so rebutted researchers speak first, the most
/// rebutted earliest; ties and the non-rebutted block keep base order.
pub fn speaking_order(base_order: &[String], rebuttals_prev_round: &[Rebuttal]) -> Result<Vec<String>, DebateError> {
    let mut received: HashMap<&str, usize> = HashMap::new();
    for r in rebuttals_prev_round {
        if !base_order.contains(&r.target) {
            return Err(DebateError::UnknownAgent(r.target.clone()));
        }
        *received.entry(r.target.as_str()).or_insert(0) += 1;
    }
    let mut order = base_order.to_vec();
    order.sort_by_key(|name| {
        let n = received.get(name.as_str()).copied().unwrap_or(0);
        (n == 0, std::cmp::Reverse(n))
    });
    Ok(order)
}
