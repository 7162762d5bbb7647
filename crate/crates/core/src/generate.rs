//! Random machines and inputs for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::machine::{Direction, Machine, MachineDefinition, Transition};

pub const SYMBOLS: [&str; 3] = ["0", "1", "2"];

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_states: usize,
    pub max_symbols: usize,
    pub deterministic: bool,
}

/// Random valid machine. Input alphabet is a prefix of `SYMBOLS`; the tape
/// alphabet adds the blank `B`.
pub fn random_machine<R: Rng>(rng: &mut R, shape: &Shape) -> Machine {
    let n_states = rng.gen_range(1..=shape.max_states);
    let n_symbols = rng.gen_range(1..=shape.max_symbols);
    let states: Vec<String> = (0..n_states).map(|i| format!("q{i}")).collect();
    let mut tape: Vec<&str> = SYMBOLS[..n_symbols].to_vec();
    tape.push("B");

    let mut transitions = Vec::new();
    for src in &states {
        for &read in &tape {
            let count = if shape.deterministic {
                usize::from(rng.gen_bool(0.75))
            } else {
                rng.gen_range(0..=3)
            };
            for _ in 0..count {
                let t = Transition::new(
                    src,
                    read,
                    states.choose(rng).unwrap(),
                    tape.choose(rng).unwrap(),
                    *Direction::ALL.choose(rng).unwrap(),
                    random_weight(rng),
                );
                if !transitions.iter().any(|u: &Transition| {
                    (&u.source, &u.read, &u.target, &u.write, u.direction)
                        == (&t.source, &t.read, &t.target, &t.write, t.direction)
                }) {
                    transitions.push(t);
                }
            }
        }
    }

    let start_states = if shape.deterministic {
        vec![(states[0].clone(), 1.0)]
    } else {
        let k = rng.gen_range(1..=n_states.min(2));
        states[..k]
            .iter()
            .map(|q| (q.clone(), if rng.gen_bool(0.5) { 1.0 } else { rng.gen_range(0.05..=1.0) }))
            .collect()
    };
    let final_states = states.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();

    Machine::new(MachineDefinition {
        states,
        input_alphabet: SYMBOLS[..n_symbols].iter().map(|&s| s.into()).collect(),
        tape_alphabet: tape.iter().map(|&s| s.into()).collect(),
        blank: "B".into(),
        transitions,
        start_states,
        final_states,
    })
    .expect("generated machine is valid")
}

/// Mostly uniform weights with some exact 0, 1 and repeated values.
pub fn random_weight<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..12) {
        0 => 0.0,
        1 => 1.0,
        2 => 0.5,
        _ => (rng.gen_range(1..=1000) as f64) / 1000.0,
    }
}

pub fn random_input<R: Rng>(rng: &mut R, machine: &Machine, max_len: usize) -> Vec<String> {
    let alphabet = &machine.definition().input_alphabet;
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| alphabet.choose(rng).unwrap().as_str().to_owned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deterministic_shape_gives_deterministic_machines() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = Shape { max_states: 6, max_symbols: 3, deterministic: true };
        for _ in 0..200 {
            let m = random_machine(&mut rng, &shape);
            assert!(m.is_deterministic());
            assert!(m.num_states() <= 6);
            let input = random_input(&mut rng, &m, 8);
            assert!(input.len() <= 8);
            assert!(m.encode_input(&input).is_ok());
        }
    }
}
