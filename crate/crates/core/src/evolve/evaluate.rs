use serde::{Deserialize, Serialize};

use crate::aurora::{path_to_vector, Autoencoder, PathVector};
use crate::descriptors::{self, Descriptor, DescriptorSpace};
use crate::fitness::{self, FitnessKind, TargetPointSet};
use crate::genome::{EncodingConfig, Genome};
use crate::kinematics::{Linkage, PathTrace};

/// Path shape numbers kept with every evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PathSummary {
    pub width: f64,
    pub height: f64,
    pub lift: f64,
    pub step_length: f64,
    /// False when no crank step was feasible.
    pub valid: bool,
}

impl PathSummary {
    pub fn of(t: &PathTrace) -> Self {
        let m = t.metrics();
        Self { width: m.width, height: m.height, lift: fitness::lift(t), step_length: fitness::step_length(t), valid: m.valid }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub genome: Genome,
    /// Raw scalar fitness in the sign convention of its [`FitnessKind`].
    pub fitness: f64,
    /// Raw two-objective values, present for multi-objective runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<[f64; 2]>,
    /// Present for repertoire runs when the descriptor could be computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<Descriptor>,
    pub error_count: usize,
    pub summary: PathSummary,
}

/// Everything needed to turn a genome into an [`Evaluation`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluator {
    pub encoding: EncodingConfig,
    pub steps: usize,
    pub fitness: FitnessKind,
    pub targets: TargetPointSet,
    pub multiobjective: bool,
    /// Descriptor space to compute, if any.
    pub space: Option<DescriptorSpace>,
}

impl Evaluator {
    pub fn simulate(&self, genome: &Genome) -> (Linkage, PathTrace) {
        let linkage = genome.decode(&self.encoding);
        let trace = linkage.solve(self.steps);
        (linkage, trace)
    }

    /// Evaluates a genome. `ae` is required for the learned descriptor
    /// space; without it the descriptor is left empty.
    pub fn evaluate(&self, genome: &Genome, ae: Option<&Autoencoder>) -> Evaluation {
        let (linkage, trace) = self.simulate(genome);
        self.evaluate_trace(genome.clone(), &linkage, &trace, ae)
    }

    pub fn evaluate_trace(&self, genome: Genome, linkage: &Linkage, trace: &PathTrace, ae: Option<&Autoencoder>) -> Evaluation {
        let descriptor = match self.space {
            None => None,
            Some(DescriptorSpace::Wh) => descriptors::descriptor_wh(trace),
            Some(DescriptorSpace::Lis) => descriptors::descriptor_lis(linkage, trace),
            Some(DescriptorSpace::St) => {
                (!trace.foot_path.is_empty()).then(|| descriptors::descriptor_st(linkage, trace.foot_index))
            }
            Some(DescriptorSpace::Au) => ae.and_then(|ae| latent_descriptor(ae, trace)),
        };
        Evaluation {
            genome,
            fitness: self.fitness.evaluate(trace, &self.targets),
            objectives: self.multiobjective.then(|| self.fitness.evaluate_mo(trace, &self.targets)),
            descriptor,
            error_count: trace.error_count,
            summary: PathSummary::of(trace),
        }
    }

    /// Evaluation plus the network input of its foot path (when error-free).
    pub fn evaluate_with_vector(&self, genome: &Genome, ae: Option<&Autoencoder>) -> (Evaluation, Option<PathVector>) {
        let (linkage, trace) = self.simulate(genome);
        let e = self.evaluate_trace(genome.clone(), &linkage, &trace, ae);
        (e, path_to_vector(&trace))
    }

    /// Network input for the genome's foot path, if it has no errors.
    pub fn path_vector(&self, genome: &Genome) -> Option<PathVector> {
        path_to_vector(&self.simulate(genome).1)
    }
}

/// Bottleneck descriptor of an error-free trace.
pub fn latent_descriptor(ae: &Autoencoder, trace: &PathTrace) -> Option<Descriptor> {
    path_to_vector(trace).map(|v| Descriptor::new(DescriptorSpace::Au, ae.encode(&v.0)))
}
