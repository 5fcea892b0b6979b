#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace winfo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define WINFO_DECLARE_ERROR(Name)                 \
    class Name : public Error {                   \
    public:                                       \
        using Error::Error;                       \
    }

// core
WINFO_DECLARE_ERROR(EmptyModel);
WINFO_DECLARE_ERROR(DimMismatch);
WINFO_DECLARE_ERROR(EmptyEnsemble);
WINFO_DECLARE_ERROR(FormatError);
WINFO_DECLARE_ERROR(TruncationError);
WINFO_DECLARE_ERROR(HeaderError);
WINFO_DECLARE_ERROR(ManifestError);

// mds
WINFO_DECLARE_ERROR(AsymmetricInput);
WINFO_DECLARE_ERROR(RankError);
WINFO_DECLARE_ERROR(DegenerateEmbedding);

// qmcm
WINFO_DECLARE_ERROR(EmptyReference);
WINFO_DECLARE_ERROR(CvUndefined);
WINFO_DECLARE_ERROR(SourceExhausted);
WINFO_DECLARE_ERROR(NotConverged);
WINFO_DECLARE_ERROR(DomainError);
WINFO_DECLARE_ERROR(InsufficientSamples);

// infometrics
WINFO_DECLARE_ERROR(InvalidDistribution);
WINFO_DECLARE_ERROR(ShrinkViolation);
WINFO_DECLARE_ERROR(EmptyTable);
WINFO_DECLARE_ERROR(BinMismatch);
WINFO_DECLARE_ERROR(DegenerateFit);

// toytrain
WINFO_DECLARE_ERROR(NoClassesLeft);
WINFO_DECLARE_ERROR(InvalidArgument);

// harness
WINFO_DECLARE_ERROR(PairingError);

#undef WINFO_DECLARE_ERROR

/// A layer tensor contained NaN or Inf.
class NonFiniteLayer : public Error {
public:
    explicit NonFiniteLayer(std::size_t layer)
        : Error("non-finite entry in layer " + std::to_string(layer)), layer_(layer) {}
    std::size_t layer() const noexcept { return layer_; }

private:
    std::size_t layer_;
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(double residual)
        : Error("eigensolver did not converge (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(std::size_t step)
        : Error("training diverged at step " + std::to_string(step)), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// The nearest-pairing check failed for one experimental arm, so the
/// QMCM comparison is refused.
class PreconditionFailed : public Error {
public:
    PreconditionFailed(double arm, double pairing)
        : Error("pairing precondition failed for arm " + std::to_string(arm) + " (fraction " +
                std::to_string(pairing) + ")"),
          arm_(arm), pairing_(pairing) {}
    double arm() const noexcept { return arm_; }
    double pairing() const noexcept { return pairing_; }

private:
    double arm_;
    double pairing_;
};

}  // namespace winfo
