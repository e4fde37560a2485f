#pragma once

#include <vector>

#include "tactile_rom/rom/autoencoder.hpp"
#include "tactile_rom/rom/encoding.hpp"

namespace trom::train {

struct LossWeights {
  double rec = 1.0;         // reconstruction
  double vel = 0.4;         // consistency, velocity term
  double defgrad = 0.6;     // consistency, deformation-gradient term
  double multiscale = 0.0;  // decimated-subset reconstruction
};

// Weighted loss contributions; total() is what training minimizes. cons_*
// are zero when the physics term is disabled.
struct LossTerms {
  double rec = 0.0;
  double cons_v = 0.0;
  double cons_F = 0.0;
  double ms = 0.0;
  double total() const { return rec + cons_v + cons_F + ms; }
};

// One mini-batch of consecutive-frame pairs for a single particle layout.
// q_* are normalized packed states (12N x B); targets are physical units at
// the later frame of each pair (3N x B and 9N x B).
template <typename T>
struct PairBatch {
  typename rom::Mlp<T>::Mat q_prev;
  typename rom::Mlp<T>::Mat q_cur;
  typename rom::Mlp<T>::Mat target_v;
  typename rom::Mlp<T>::Mat target_F;
  double frame_dt = 0.0;
};

// Loss over a batch, with parameter gradients accumulated into grad_enc /
// grad_dec (pass nullptr for evaluation only).
//
// Reconstruction and the decimated-subset term average squared residuals in
// normalized coordinates over the 2B frames of the batch. The consistency
// term compares, in physical units, finite-differenced velocities of decoded
// consecutive frames and the decoded F block against coarse-solver targets,
// averaged over the B pairs.
template <typename T>
LossTerms loss_and_gradients(const rom::Autoencoder<T>& net, const rom::NormStats& norm,
                             const PairBatch<T>& batch, const LossWeights& w,
                             bool consistency_on, std::vector<T>* grad_enc,
                             std::vector<T>* grad_dec) {
  using Mat = typename rom::Mlp<T>::Mat;
  using RowVecT = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  using Cache = typename rom::Mlp<T>::Cache;
  constexpr int kC = rom::StateEncoding::kChannels;

  const Eigen::Index dim = batch.q_cur.rows();
  const Eigen::Index B = batch.q_cur.cols();
  if (batch.q_prev.rows() != dim || batch.q_prev.cols() != B)
    throw ShapeError("loss: prev/cur batch shapes differ");
  if (dim % kC != 0) throw ShapeError("loss: state rows not a multiple of the channel count");
  const Eigen::Index n = dim / kC;
  if (consistency_on) {
    if (batch.target_v.rows() != 3 * n || batch.target_v.cols() != B ||
        batch.target_F.rows() != 9 * n || batch.target_F.cols() != B)
      throw ShapeError("loss: target shapes do not match the batch");
    if (!(batch.frame_dt > 0.0)) throw ShapeError("loss: frame_dt must be positive");
  }

  Cache ce_p, cd_p, ce_c, cd_c;
  const bool want_grads = grad_enc != nullptr && grad_dec != nullptr;
  Mat z_p = net.encode(batch.q_prev, want_grads ? &ce_p : nullptr);
  Mat x_p = net.decode(z_p, want_grads ? &cd_p : nullptr);
  Mat z_c = net.encode(batch.q_cur, want_grads ? &ce_c : nullptr);
  Mat x_c = net.decode(z_c, want_grads ? &cd_c : nullptr);

  Mat r_p = x_p - batch.q_prev;
  Mat r_c = x_c - batch.q_cur;

  LossTerms L;
  const double inv_2b = 1.0 / static_cast<double>(2 * B);
  L.rec = w.rec * inv_2b *
          (static_cast<double>(r_p.squaredNorm()) + static_cast<double>(r_c.squaredNorm()));

  Mat dx_p = static_cast<T>(2.0 * w.rec * inv_2b) * r_p;
  Mat dx_c = static_cast<T>(2.0 * w.rec * inv_2b) * r_c;

  if (w.multiscale > 0.0) {
    // Supervise every other particle again: a 2x-decimated subset.
    const T c = static_cast<T>(2.0 * w.multiscale * inv_2b);
    double ms = 0.0;
    for (Eigen::Index i = 0; i < n; i += 2) {
      auto rp = r_p.middleRows(kC * i, kC);
      auto rc = r_c.middleRows(kC * i, kC);
      ms += static_cast<double>(rp.squaredNorm()) + static_cast<double>(rc.squaredNorm());
      dx_p.middleRows(kC * i, kC) += c * rp;
      dx_c.middleRows(kC * i, kC) += c * rc;
    }
    L.ms = w.multiscale * inv_2b * ms;
  }

  if (consistency_on) {
    const double inv_b = 1.0 / static_cast<double>(B);
    // Column-major 12N x B memory doubles as 12 x (N*B): one particle-frame
    // per column, which keeps the channel arithmetic on whole rows.
    Eigen::Map<const Mat> vc(x_c.data(), kC, n * B);
    Eigen::Map<const Mat> vp(x_p.data(), kC, n * B);
    Eigen::Map<const Mat> tv(batch.target_v.data(), 3, n * B);
    Eigen::Map<const Mat> tf(batch.target_F.data(), 9, n * B);
    Eigen::Map<Mat> dvc(dx_c.data(), kC, n * B);
    Eigen::Map<Mat> dvp(dx_p.data(), kC, n * B);

    for (int a = 0; a < 3; ++a) {
      const double s = norm.std[a] / batch.frame_dt;  // d(velocity)/d(normalized output)
      RowVecT ev = static_cast<T>(s) * (vc.row(a) - vp.row(a)) - tv.row(a);
      L.cons_v += w.vel * inv_b * static_cast<double>(ev.squaredNorm());
      dvc.row(a) += static_cast<T>(2.0 * w.vel * inv_b * s) * ev;
      dvp.row(a) -= static_cast<T>(2.0 * w.vel * inv_b * s) * ev;
    }
    for (int k = 0; k < 9; ++k) {
      const int a = 3 + k;
      RowVecT ef = static_cast<T>(norm.std[a]) * vc.row(a) - tf.row(k);
      ef.array() += static_cast<T>(norm.mean[a]);
      L.cons_F += w.defgrad * inv_b * static_cast<double>(ef.squaredNorm());
      dvc.row(a) += static_cast<T>(2.0 * w.defgrad * inv_b * norm.std[a]) * ef;
    }
  }

  if (want_grads) {
    Mat dz_c = net.decoder.backward(dx_c, cd_c, grad_dec);
    net.encoder.backward(dz_c, ce_c, grad_enc);
    Mat dz_p = net.decoder.backward(dx_p, cd_p, grad_dec);
    net.encoder.backward(dz_p, ce_p, grad_enc);
  }
  return L;
}

}  // namespace trom::train
