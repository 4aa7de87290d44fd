#pragma once

#include "platekeeper/api.hpp"
#include "platekeeper/domain.hpp"
#include "platekeeper/journal.hpp"
#include "platekeeper/policy.hpp"
#include "platekeeper/service.hpp"
#include "platekeeper/store.hpp"
#include "platekeeper/workload.hpp"
