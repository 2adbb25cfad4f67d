#ifndef VSP_ERROR_HPP
#define VSP_ERROR_HPP

#include <stdexcept>
#include <string>

namespace vsp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define VSP_DEFINE_ERROR(Name)                                                 \
  struct Name : Error {                                                        \
    using Error::Error;                                                        \
  }

VSP_DEFINE_ERROR(CycleDetected);
VSP_DEFINE_ERROR(UnknownActor);
VSP_DEFINE_ERROR(OracleBoundExceeded);
VSP_DEFINE_ERROR(ActorPresent);
VSP_DEFINE_ERROR(EdgeNotFound);
VSP_DEFINE_ERROR(LastActor);
VSP_DEFINE_ERROR(ActorMismatch);
VSP_DEFINE_ERROR(NotVsp);
VSP_DEFINE_ERROR(OutOfSupport);
VSP_DEFINE_ERROR(EmptyTrace);
VSP_DEFINE_ERROR(DegenerateTrace);
VSP_DEFINE_ERROR(InconsistentConsensus);
VSP_DEFINE_ERROR(UnknownGroup);
VSP_DEFINE_ERROR(ParseError);
VSP_DEFINE_ERROR(DuplicateInList);
VSP_DEFINE_ERROR(UnknownActorId);
VSP_DEFINE_ERROR(SchemaMismatch);
VSP_DEFINE_ERROR(TruncatedTrace);

#undef VSP_DEFINE_ERROR

} // namespace vsp

#endif
