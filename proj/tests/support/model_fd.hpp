#pragma once

// End-to-end finite-difference oracle for the joint objective: flattens every
// parameter, perturbs one coordinate at a time, and re-runs the forward pass.
// Independent of the analytic backward path by construction.

#include <vector>

#include "stylemem/model.hpp"
#include "stylemem/train.hpp"

namespace fdcheck {

inline double joint_value(const stylemem::ModelParams<double>& p, const stylemem::Tensor<double>& x,
                          const std::vector<int>& labels, double alpha,
                          stylemem::BatchCache<double>& cache) {
    stylemem::model_forward(p, x, cache);
    return stylemem::batch_metrics(cache, x, labels, alpha).loss_joint;
}

struct ModelGradCheck {
    double max_rel_error = 0.0;
    std::size_t coordinates = 0;
};

inline ModelGradCheck check_model_gradient(stylemem::ModelParams<double>& p,
                                           const stylemem::Tensor<double>& x,
                                           const std::vector<int>& labels, double alpha,
                                           double h = 1e-5) {
    stylemem::BatchCache<double> cache;
    stylemem::model_forward(p, x, cache);
    stylemem::ModelParams<double> grads(p.arch);
    stylemem::JointWorkspace<double> ws;
    stylemem::joint_backward(p, cache, x, labels, alpha, stylemem::GradFlags{}, grads, ws);

    std::vector<stylemem::Tensor<double>*> param_blocks;
    std::vector<const stylemem::Tensor<double>*> grad_blocks;
    stylemem::visit_params(p, [&](const char*, stylemem::Tensor<double>& t) { param_blocks.push_back(&t); });
    stylemem::visit_params(grads, [&](const char*, const stylemem::Tensor<double>& t) {
        grad_blocks.push_back(&t);
    });

    ModelGradCheck result;
    stylemem::BatchCache<double> fd_cache;
    for (std::size_t blk = 0; blk < param_blocks.size(); ++blk) {
        stylemem::Tensor<double>& block = *param_blocks[blk];
        for (std::size_t i = 0; i < block.size(); ++i) {
            double keep = block[i];
            block[i] = keep + h;
            double fp = joint_value(p, x, labels, alpha, fd_cache);
            block[i] = keep - h;
            double fm = joint_value(p, x, labels, alpha, fd_cache);
            block[i] = keep;
            double fd = (fp - fm) / (2.0 * h);
            double an = (*grad_blocks[blk])[i];
            double denom = std::max({std::fabs(an), std::fabs(fd), 1e-3});
            result.max_rel_error = std::max(result.max_rel_error, std::fabs(an - fd) / denom);
            result.coordinates += 1;
        }
    }
    return result;
}

}  // namespace fdcheck
