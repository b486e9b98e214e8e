#pragma once

#include <stdexcept>
#include <string>

namespace scrawl {

// Library-wide error taxonomy. The CLI maps each type to a distinct
// process exit code (see tools/main.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SCRAWL_DEFINE_ERROR(NAME)                                            \
    class NAME : public Error {                                              \
    public:                                                                  \
        using Error::Error;                                                  \
    }

SCRAWL_DEFINE_ERROR(EmptyInkError);      // no points / no usable segments
SCRAWL_DEFINE_ERROR(DegenerateInkError); // x-deviation below the usable floor
SCRAWL_DEFINE_ERROR(InvalidConfigError); // bad probability, empty template set, ...
SCRAWL_DEFINE_ERROR(ShapeError);         // matrix dimensions do not conform
SCRAWL_DEFINE_ERROR(TapeError);          // gradient requested for a foreign/non-scalar node
SCRAWL_DEFINE_ERROR(NumericalError);     // non-finite value where a finite one is required
SCRAWL_DEFINE_ERROR(LabelError);         // class label outside [0, class_count)
SCRAWL_DEFINE_ERROR(TokenError);         // malformed generation token sequence
SCRAWL_DEFINE_ERROR(ParseError);         // malformed input file
SCRAWL_DEFINE_ERROR(ValueError);         // well-formed file with an unusable value
SCRAWL_DEFINE_ERROR(ConfigError);        // inconsistent model pairing / checkpoint
SCRAWL_DEFINE_ERROR(IoError);            // file cannot be opened or written

#undef SCRAWL_DEFINE_ERROR

} // namespace scrawl
