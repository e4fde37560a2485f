#pragma once

#include <string>
#include <vector>

#include "tactile_rom/rom/mlp.hpp"

namespace trom::rom {

// Network shape. `hidden` lists the encoder's hidden widths; the decoder
// mirrors them in reverse. input_dim == output_dim == 12 * particle_count
// for the state encoding used here, but the nets don't assume that.
struct ArchDescriptor {
  int input_dim = 0;
  std::vector<int> hidden;
  int latent_dim = 0;

  std::vector<int> encoder_dims() const {
    std::vector<int> d;
    d.push_back(input_dim);
    d.insert(d.end(), hidden.begin(), hidden.end());
    d.push_back(latent_dim);
    return d;
  }
  std::vector<int> decoder_dims() const {
    std::vector<int> d;
    d.push_back(latent_dim);
    d.insert(d.end(), hidden.rbegin(), hidden.rend());
    d.push_back(input_dim);
    return d;
  }
  bool operator==(const ArchDescriptor& o) const {
    return input_dim == o.input_dim && hidden == o.hidden && latent_dim == o.latent_dim;
  }
};

template <typename T>
struct Autoencoder {
  using Mat = typename Mlp<T>::Mat;
  using Vec = typename Mlp<T>::Vec;

  ArchDescriptor arch;
  Mlp<T> encoder;
  Mlp<T> decoder;

  void build(const ArchDescriptor& a) {
    if (a.input_dim <= 0 || a.latent_dim <= 0)
      throw ShapeError("autoencoder dims must be positive");
    arch = a;
    encoder.build(a.encoder_dims());
    decoder.build(a.decoder_dims());
  }

  void init(Rng& rng) {
    encoder.init(rng);
    decoder.init(rng);
  }

  std::size_t param_count() const { return encoder.param_count() + decoder.param_count(); }

  Mat encode(const Mat& q, typename Mlp<T>::Cache* cache = nullptr) const {
    Mat z = encoder.forward(q, cache);
    if (!z.allFinite())
      throw NumericalError("encoder produced non-finite output; parameters are corrupt");
    return z;
  }

  Mat decode(const Mat& z, typename Mlp<T>::Cache* cache = nullptr) const {
    Mat q = decoder.forward(z, cache);
    if (!q.allFinite())
      throw NumericalError("decoder produced non-finite output; parameters are corrupt");
    return q;
  }

  Mat reconstruct(const Mat& q) const { return decode(encode(q)); }

  // Convert parameters to another scalar type, e.g. the f32 training weights
  // into an f64 net for optimization in latent space.
  template <typename U>
  Autoencoder<U> cast() const {
    Autoencoder<U> out;
    out.build(arch);
    for (std::size_t i = 0; i < encoder.params.size(); ++i)
      out.encoder.params[i] = static_cast<U>(encoder.params[i]);
    for (std::size_t i = 0; i < decoder.params.size(); ++i)
      out.decoder.params[i] = static_cast<U>(decoder.params[i]);
    return out;
  }
};

}  // namespace trom::rom
