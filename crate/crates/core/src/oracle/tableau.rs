//! Stabilizer-tableau simulator (destabilizer/stabilizer rows with signs)
//! used as an independent check of the Pauli-frame engine.
//!
//! [`tableau_run`] simulates a noiseless and a faulty copy of a circuit in
//! lockstep. When a measurement is random, both copies share the ideal
//! outcome, corrected by whether the faulty copy's accumulated error
//! anticommutes with the measured observable; that error is read off the
//! sign differences between the two tableaus, never from the frame engine.

use rand::Rng;

use crate::error::{Error, Result};
use crate::frame::{Gate, MeasurementRecord, PauliFrame, PauliOp, Qubit, ScheduledCircuit, MAX_QUBITS};
use crate::noise::{Fault, FaultEvent};

/// Stabilizer state of up to 64 qubits: rows `0..n` are destabilizers,
/// `n..2n` stabilizers, row `2n` is scratch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    r: Vec<bool>,
}

/// Phase exponent (mod 4) contributed when row `(x1, z1)` multiplies onto `(x2, z2)`.
fn phase_sum(x1: u64, z1: u64, x2: u64, z2: u64) -> i64 {
    let pos = (x1 & z1 & z2 & !x2) | (x1 & !z1 & z2 & x2) | (!x1 & z1 & x2 & !z2);
    let neg = (x1 & z1 & x2 & !z2) | (x1 & !z1 & z2 & !x2) | (!x1 & z1 & x2 & z2);
    i64::from(pos.count_ones()) - i64::from(neg.count_ones())
}

impl Tableau {
    /// |0…0⟩ on `n` qubits.
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::Contract(format!("tableau limited to {MAX_QUBITS} qubits, got {n}")));
        }
        let mut t = Tableau { n, x: vec![0; 2 * n + 1], z: vec![0; 2 * n + 1], r: vec![false; 2 * n + 1] };
        for i in 0..n {
            t.x[i] = 1 << i;
            t.z[n + i] = 1 << i;
        }
        Ok(t)
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn cnot(&mut self, c: Qubit, t: Qubit) {
        for i in 0..2 * self.n {
            let (xc, zc) = (self.x[i] >> c & 1, self.z[i] >> c & 1);
            let (xt, zt) = (self.x[i] >> t & 1, self.z[i] >> t & 1);
            if xc & zt & (xt ^ zc ^ 1) == 1 {
                self.r[i] ^= true;
            }
            self.x[i] ^= xc << t;
            self.z[i] ^= zt << c;
        }
    }

    pub fn h(&mut self, q: Qubit) {
        for i in 0..2 * self.n {
            let (xq, zq) = (self.x[i] >> q & 1, self.z[i] >> q & 1);
            if xq & zq == 1 {
                self.r[i] ^= true;
            }
            if xq != zq {
                self.x[i] ^= 1 << q;
                self.z[i] ^= 1 << q;
            }
        }
    }

    /// Conjugation by a Pauli: flips the sign of every row it anticommutes with.
    pub fn apply_pauli(&mut self, q: Qubit, p: PauliOp) {
        let (px, pz) = (u64::from(p.has_x()) << q, u64::from(p.has_z()) << q);
        for i in 0..2 * self.n {
            if ((self.x[i] & pz) ^ (self.z[i] & px)) != 0 {
                self.r[i] ^= true;
            }
        }
    }

    fn rowsum(&mut self, h: usize, i: usize) {
        let sum = 2 * i64::from(self.r[h]) + 2 * i64::from(self.r[i]) + phase_sum(self.x[i], self.z[i], self.x[h], self.z[h]);
        self.r[h] = sum.rem_euclid(4) == 2;
        self.x[h] ^= self.x[i];
        self.z[h] ^= self.z[i];
    }

    /// Stabilizer row anticommuting with `Z_q`, if the Z measurement is random.
    pub fn random_pivot(&self, q: Qubit) -> Option<usize> {
        (self.n..2 * self.n).find(|&p| self.x[p] >> q & 1 == 1)
    }

    /// Measures `Z_q`. A random outcome is set to `forced`. Returns
    /// `(outcome, was_random)`.
    pub fn measure_z(&mut self, q: Qubit, forced: bool) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = self.random_pivot(q) {
            for i in 0..2 * n {
                if i != p && self.x[i] >> q & 1 == 1 {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p];
            self.z[p - n] = self.z[p];
            self.r[p - n] = self.r[p];
            self.x[p] = 0;
            self.z[p] = 1 << q;
            self.r[p] = forced;
            (forced, true)
        } else {
            let s = 2 * n;
            self.x[s] = 0;
            self.z[s] = 0;
            self.r[s] = false;
            for i in 0..n {
                if self.x[i] >> q & 1 == 1 {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], false)
        }
    }

    /// Stabilizer generators as `(Pauli, negative sign)`.
    pub fn stabilizers(&self) -> impl Iterator<Item = (PauliFrame, bool)> + '_ {
        (self.n..2 * self.n).map(|i| (PauliFrame::from_masks(self.x[i], self.z[i]), self.r[i]))
    }

    /// Whether `q` is an eigenstate of `Z_q` (deterministic Z measurement).
    pub fn is_z_deterministic(&self, q: Qubit) -> bool {
        self.random_pivot(q).is_none()
    }

    /// A Pauli `P` such that `other = P · self`, read off the stabilizer
    /// sign differences. `P` is defined up to the stabilizer group; both
    /// tableaus must have the same rows up to sign.
    pub fn relative_pauli(&self, other: &Tableau) -> PauliFrame {
        let n = self.n;
        let mut p = PauliFrame::identity();
        for i in 0..n {
            // destabilizer i anticommutes with stabilizer i and commutes with the rest
            if self.r[n + i] != other.r[n + i] {
                p ^= PauliFrame::from_masks(self.x[i], self.z[i]);
            }
        }
        p
    }
}

/// Lockstep ideal/faulty simulation of one circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableauRun {
    /// Ideal outcome of each measurement slot.
    pub outcomes: Vec<bool>,
    /// Whether each ideal outcome was random.
    pub random: Vec<bool>,
    /// Faulty-minus-ideal outcome flips.
    pub flips: MeasurementRecord,
    pub ideal: Tableau,
    pub faulty: Tableau,
}

impl TableauRun {
    /// Whether `frame` explains the final state: the faulty stabilizer signs
    /// differ from the ideal ones exactly where `frame` anticommutes.
    pub fn frame_consistent(&self, frame: &PauliFrame) -> bool {
        self.ideal
            .stabilizers()
            .zip(self.faulty.stabilizers())
            .all(|((s, ri), (_, rf))| (ri != rf) == s.anticommutes_with(frame))
    }
}

fn measure_pair<R: Rng + ?Sized>(
    ideal: &mut Tableau,
    faulty: &mut Tableau,
    q: Qubit,
    hint: Option<bool>,
    rng: &mut R,
) -> (bool, bool, bool) {
    if ideal.random_pivot(q).is_some() {
        let anti = hint.unwrap_or_else(|| ideal.relative_pauli(faulty).x_mask() >> q & 1 == 1);
        let r = rng.gen::<bool>();
        ideal.measure_z(q, r);
        faulty.measure_z(q, r ^ anti);
        (r, r ^ anti, true)
    } else {
        let (a, _) = ideal.measure_z(q, false);
        let (b, random) = faulty.measure_z(q, false);
        debug_assert!(!random, "tableaus diverged in structure");
        (a, b, false)
    }
}

/// Simulates `circuit` from |0…0⟩ with and without `faults` (sorted by
/// location), drawing random ideal outcomes from `rng`.
pub fn tableau_run<R: Rng + ?Sized>(circuit: &ScheduledCircuit, faults: &[FaultEvent], rng: &mut R) -> Result<TableauRun> {
    tableau_run_coupled(circuit, faults, None, rng)
}

/// Like [`tableau_run`], but when the ideal Z measurement inside a
/// measurement or preparation at location `l` is random, the faulty outcome
/// differs from it exactly when `coupling[l]` is set. Either pairing of a
/// random outcome is equally likely, so the choice only fixes which Pauli
/// relates the two post-measurement states; later deterministic outcomes and
/// the final state then test that choice.
pub fn tableau_run_coupled<R: Rng + ?Sized>(
    circuit: &ScheduledCircuit,
    faults: &[FaultEvent],
    coupling: Option<&[bool]>,
    rng: &mut R,
) -> Result<TableauRun> {
    let n = circuit.n_qubits();
    let mut ideal = Tableau::new(n)?;
    let mut faulty = Tableau::new(n)?;
    let mut outcomes = vec![false; circuit.n_measurements()];
    let mut random = vec![false; circuit.n_measurements()];
    let mut flips = MeasurementRecord::zero();
    let mut next = faults.iter().peekable();

    for (_, loc, gate) in circuit.locations() {
        let fault = next.next_if(|f| f.location == loc).map(|f| f.fault);
        match (*gate, fault) {
            (Gate::PrepZ(q) | Gate::PrepX(q), f) => {
                let (a, b, _) = measure_pair(&mut ideal, &mut faulty, q, coupling.map(|c| c[loc]), rng);
                if a {
                    ideal.apply_pauli(q, PauliOp::X);
                }
                if b {
                    faulty.apply_pauli(q, PauliOp::X);
                }
                if matches!(gate, Gate::PrepX(_)) {
                    ideal.h(q);
                    faulty.h(q);
                }
                match f {
                    None => {}
                    Some(Fault::Flip) => {
                        let p = if matches!(gate, Gate::PrepZ(_)) { PauliOp::X } else { PauliOp::Z };
                        faulty.apply_pauli(q, p);
                    }
                    Some(other) => return Err(Error::Contract(format!("fault {other:?} on preparation"))),
                }
            }
            (Gate::MeasZ(q) | Gate::MeasX(q), f) => {
                let x_basis = matches!(gate, Gate::MeasX(_));
                if x_basis {
                    ideal.h(q);
                    faulty.h(q);
                }
                let reported = match f {
                    None => false,
                    Some(Fault::Flip) => true,
                    Some(other) => return Err(Error::Contract(format!("fault {other:?} on measurement"))),
                };
                let slot = circuit.slot_of_location(loc).expect("measurement has a slot");
                let hint = coupling.map(|c| c[loc]);
                let (a, b, was_random) = measure_pair(&mut ideal, &mut faulty, q, hint, rng);
                if x_basis {
                    ideal.h(q);
                    faulty.h(q);
                }
                let flip = a ^ b ^ reported;
                outcomes[slot] = a;
                random[slot] = was_random;
                if flip {
                    flips.flip(slot);
                }
            }
            (Gate::Cnot { control, target }, f) => {
                ideal.cnot(control, target);
                faulty.cnot(control, target);
                match f {
                    None => {}
                    Some(Fault::Pair(pc, pt)) => {
                        faulty.apply_pauli(control, pc);
                        faulty.apply_pauli(target, pt);
                    }
                    Some(other) => return Err(Error::Contract(format!("fault {other:?} on CNOT"))),
                }
            }
            (Gate::Wait(q), f) => match f {
                None => {}
                Some(Fault::Pauli(p)) => faulty.apply_pauli(q, p),
                Some(other) => return Err(Error::Contract(format!("fault {other:?} on wait"))),
            },
        }
    }
    if let Some(f) = next.next() {
        return Err(Error::Contract(format!("fault at location {} unused (unsorted or out of range)", f.location)));
    }
    Ok(TableauRun { outcomes, random, flips, ideal, faulty })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steane::{self, STABILIZERS};
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    #[test]
    fn bell_pair_outcomes_agree() {
        let c = ScheduledCircuit::new(
            2,
            vec![vec![Gate::PrepX(0), Gate::PrepZ(1)], vec![Gate::cnot(0, 1)], vec![Gate::MeasZ(0), Gate::MeasZ(1)]],
        )
        .unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        for _ in 0..20 {
            let run = tableau_run(&c, &[], &mut rng).unwrap();
            assert!(run.random[0] && !run.random[1]);
            assert_eq!(run.outcomes[0], run.outcomes[1]);
            assert!(run.flips.is_zero());
        }
    }

    #[test]
    fn encoded_zero_satisfies_parity_checks() {
        let mut layers: Vec<Vec<Gate>> = steane::zero_encoder_layers(&steane::block_range(0));
        layers.push((0..7).map(Gate::MeasZ).collect());
        let c = ScheduledCircuit::new(7, layers).unwrap();
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..200 {
            let run = tableau_run(&c, &[], &mut rng).unwrap();
            let word = run.outcomes.iter().enumerate().fold(0u8, |w, (i, &b)| w | (b as u8) << i);
            for g in STABILIZERS {
                assert_eq!((word & g).count_ones() % 2, 0);
            }
            assert_eq!(word.count_ones() % 2, 0, "logical Z = +1");
            seen.insert(word);
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn relative_pauli_recovers_error() {
        let mut a = Tableau::new(3).unwrap();
        a.h(0);
        a.cnot(0, 1);
        a.cnot(1, 2);
        let mut b = a.clone();
        b.apply_pauli(1, PauliOp::Y);
        b.apply_pauli(2, PauliOp::Z);
        let p = a.relative_pauli(&b);
        for ((s, ra), (_, rb)) in a.stabilizers().zip(b.stabilizers()) {
            assert_eq!(ra != rb, s.anticommutes_with(&p));
        }
    }
}
