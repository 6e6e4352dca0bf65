#pragma once

#include "cutvem/mesh.hpp"

#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace cutvem {

struct AgglomerationParams {
    double sigma_eps = 0.2;
    double beta = 1.2;
    int num_iter = 5;

    /// Throws ConfigError unless 0 < σ_ε < 1, β > 1 and num_iter ≥ 1.
    void validate() const;
};

/// Conductivity per domain id and the stabilization multiplier
/// (τ = tau_multiplier·κ of the face's domain).
struct MaterialSpec {
    std::map<int, double> kappa;
    double default_kappa = 1.0;
    double tau_multiplier = 1.0;

    double kappa_of(int domain_id) const;
    double tau_of(int domain_id) const { return tau_multiplier * kappa_of(domain_id); }
};

double face_stability_ratio(const PolyMesh& mesh, FaceId f, const MaterialSpec& material);

/// Best partner of `face`, or none when σ(face) > σ_ε or no candidate both
/// merges cleanly and improves σ beyond min{σ_ε, βσ(face), βσ(nb)}.
/// Ties go to the lower face id.
std::optional<FaceId> optimal_neighbor(const PolyMesh& mesh, FaceId face, const AgglomerationParams& params,
                                       const MaterialSpec& material);

struct MergeRecord {
    int iteration;
    FaceId popped;
    FaceId partner;
    double sigma_popped;
    double sigma_partner;
    double sigma_merged;
};

struct IterationReport {
    int iteration = 0;
    int merges = 0;
    std::size_t faces_before = 0;
    std::size_t faces_after = 0;
    double min_sigma_before = 0.0;
    double min_sigma_after = 0.0;
    /// σ of the queue entries in pop order.
    std::vector<double> popped_sigmas;
};

struct AgglomerationReport {
    std::vector<IterationReport> iterations;
    std::vector<MergeRecord> merges;
    std::vector<std::pair<FaceId, double>> profile_before;
    std::vector<std::pair<FaceId, double>> profile_after;

    int total_merges() const { return static_cast<int>(merges.size()); }
};

/// Priority-driven agglomeration sweeps. Merged faces keep the id of the
/// popped face and are not queued again within the same sweep.
AgglomerationReport agglomerate(PolyMesh& mesh, const AgglomerationParams& params, const MaterialSpec& material);

/// All faces with their σ, ascending (ties by face id).
std::vector<std::pair<FaceId, double>> stability_profile(const PolyMesh& mesh, const MaterialSpec& material);

} // namespace cutvem
