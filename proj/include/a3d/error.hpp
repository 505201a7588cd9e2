#ifndef A3D_ERROR_HPP
#define A3D_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace a3d {

enum class Errc {
  MissingKey,
  MalformedDocument,
  InvalidValue,
  QuiltTooLarge,
  BadMagic,
  TruncatedFile,
  DimensionMismatch,
  EmptyImage,
  NonFiniteValue,
  ProviderUnavailable,
  UnreadableInput,
  ModelLoadFailure,
  InvalidFov,
  InvalidDepthRange,
  InpaintFailure,
  MaskCoversEverything,
  NoKnownNeighbor,
  WrongViewCount,
  TileDimensionMismatch,
  IndexOutOfRange,
  MapNotFound,
  StaleMap,
  NoFrames,
  WriteFailure,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MissingKey: return "MissingKey";
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::QuiltTooLarge: return "QuiltTooLarge";
    case Errc::BadMagic: return "BadMagic";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyImage: return "EmptyImage";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::ProviderUnavailable: return "ProviderUnavailable";
    case Errc::UnreadableInput: return "UnreadableInput";
    case Errc::ModelLoadFailure: return "ModelLoadFailure";
    case Errc::InvalidFov: return "InvalidFov";
    case Errc::InvalidDepthRange: return "InvalidDepthRange";
    case Errc::InpaintFailure: return "InpaintFailure";
    case Errc::MaskCoversEverything: return "MaskCoversEverything";
    case Errc::NoKnownNeighbor: return "NoKnownNeighbor";
    case Errc::WrongViewCount: return "WrongViewCount";
    case Errc::TileDimensionMismatch: return "TileDimensionMismatch";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::MapNotFound: return "MapNotFound";
    case Errc::StaleMap: return "StaleMap";
    case Errc::NoFrames: return "NoFrames";
    case Errc::WriteFailure: return "WriteFailure";
  }
  return "Unknown";
}

//! Every failure raised by the library carries one of the codes above.
//! what() reads "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

//! Raised by the pipeline; wraps an Error with the name of the stage and
//! the input it was working on.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string input, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "' failed on '" + input +
                                "': " + cause.detail()),
        stage_(std::move(stage)),
        input_(std::move(input)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& input() const noexcept { return input_; }

 private:
  std::string stage_;
  std::string input_;
};

}  // namespace a3d

#endif  // A3D_ERROR_HPP
