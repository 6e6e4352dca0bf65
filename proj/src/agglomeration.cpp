#include "cutvem/agglomeration.hpp"

#include "cutvem/element.hpp"
#include "cutvem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cutvem {

void AgglomerationParams::validate() const
{
    if (!(sigma_eps > 0.0 && sigma_eps < 1.0))
        throw ConfigError("sigma_eps must lie in (0, 1)");
    if (!(beta > 1.0))
        throw ConfigError("beta must exceed 1");
    if (num_iter < 1)
        throw ConfigError("num_iter must be at least 1");
}

double MaterialSpec::kappa_of(int domain_id) const
{
    const auto it = kappa.find(domain_id);
    return it == kappa.end() ? default_kappa : it->second;
}

namespace {

double sigma_of_polygon(const std::vector<Point2>& pts, int domain_id, const MaterialSpec& material)
{
    return polygon_stability_ratio(pts, material.kappa_of(domain_id), material.tau_of(domain_id));
}

std::vector<Point2> points_of(const PolyMesh& mesh, const std::vector<VertexId>& cycle)
{
    std::vector<Point2> pts;
    pts.reserve(cycle.size());
    for (VertexId v : cycle)
        pts.push_back(mesh.vertex(v));
    return pts;
}

struct QueueEntry {
    double sigma;
    FaceId face;
};

bool entry_less(const QueueEntry& a, const QueueEntry& b)
{
    if (a.sigma != b.sigma)
        return a.sigma < b.sigma;
    return a.face < b.face;
}

struct Candidate {
    FaceId face = kInvalidId;
    double sigma = 0.0;
};

std::optional<Candidate> best_neighbor(const PolyMesh& mesh, FaceId face, double sigma_face,
                                       const AgglomerationParams& params, const MaterialSpec& material)
{
    if (sigma_face > params.sigma_eps)
        return std::nullopt;
    std::optional<Candidate> best;
    double best_sigma = sigma_face;
    for (FaceId nb : edge_adjacent_neighbors(mesh, face)) {
        const MergePlan plan = plan_merge(mesh, face, nb);
        if (!plan)
            continue;
        if (mesh.domain_id(nb) != mesh.domain_id(face))
            continue;
        const double sigma_nb = face_stability_ratio(mesh, nb, material);
        const double sigma_agg = sigma_of_polygon(points_of(mesh, plan.cycle), mesh.domain_id(face), material);
        const double bar = std::min({params.sigma_eps, params.beta * sigma_face, params.beta * sigma_nb});
        if (!(sigma_agg > bar))
            continue;
        if (sigma_agg > best_sigma) {
            best_sigma = sigma_agg;
            best = Candidate{nb, sigma_agg};
        }
    }
    return best;
}

double min_sigma(const std::vector<std::pair<FaceId, double>>& profile)
{
    return profile.empty() ? 0.0 : profile.front().second;
}

} // namespace

double face_stability_ratio(const PolyMesh& mesh, FaceId f, const MaterialSpec& material)
{
    return sigma_of_polygon(mesh.face_points(f), mesh.domain_id(f), material);
}

std::optional<FaceId> optimal_neighbor(const PolyMesh& mesh, FaceId face, const AgglomerationParams& params,
                                       const MaterialSpec& material)
{
    const auto best = best_neighbor(mesh, face, face_stability_ratio(mesh, face, material), params, material);
    if (!best)
        return std::nullopt;
    return best->face;
}

std::vector<std::pair<FaceId, double>> stability_profile(const PolyMesh& mesh, const MaterialSpec& material)
{
    std::vector<std::pair<FaceId, double>> out;
    for (FaceId f : mesh.face_ids())
        out.emplace_back(f, face_stability_ratio(mesh, f, material));
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second < b.second;
        return a.first < b.first;
    });
    return out;
}

AgglomerationReport agglomerate(PolyMesh& mesh, const AgglomerationParams& params, const MaterialSpec& material)
{
    params.validate();
    AgglomerationReport report;
    report.profile_before = stability_profile(mesh, material);
    std::vector<std::pair<FaceId, double>> profile = report.profile_before;

    for (int iter = 1; iter <= params.num_iter; ++iter) {
        IterationReport it;
        it.iteration = iter;
        it.faces_before = mesh.num_faces();
        it.min_sigma_before = min_sigma(profile);

        std::vector<QueueEntry> queue;
        for (const auto& [f, s] : profile)
            if (s < params.sigma_eps)
                queue.push_back({s, f});
        std::sort(queue.begin(), queue.end(), entry_less);

        // Popped from the front; erasing a partner keeps the order intact.
        std::size_t head = 0;
        while (head < queue.size()) {
            const QueueEntry top = queue[head++];
            it.popped_sigmas.push_back(top.sigma);
            if (!mesh.is_face(top.face))
                continue;
            const double sigma_now = face_stability_ratio(mesh, top.face, material);
            if (!(sigma_now < params.sigma_eps))
                continue;
            const auto best = best_neighbor(mesh, top.face, sigma_now, params, material);
            if (!best)
                continue;
            const double sigma_partner = face_stability_ratio(mesh, best->face, material);
            const MergeOutcome outcome = merge_faces(mesh, top.face, best->face);
            if (!outcome)
                throw InvalidMesh("planned merge was rejected on commit");
            const auto partner = std::find_if(queue.begin() + static_cast<std::ptrdiff_t>(head), queue.end(),
                                              [&](const QueueEntry& e) { return e.face == best->face; });
            if (partner != queue.end())
                queue.erase(partner);
            report.merges.push_back({iter, top.face, best->face, sigma_now, sigma_partner, best->sigma});
            ++it.merges;
        }

        profile = stability_profile(mesh, material);
        it.faces_after = mesh.num_faces();
        it.min_sigma_after = min_sigma(profile);
        report.iterations.push_back(std::move(it));
    }
    report.profile_after = profile;
    return report;
}

} // namespace cutvem
