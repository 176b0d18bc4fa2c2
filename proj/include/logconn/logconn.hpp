#pragma once

#include "logconn/connection.hpp"
#include "logconn/cover.hpp"
#include "logconn/existence.hpp"
#include "logconn/format.hpp"
#include "logconn/freegroup.hpp"
#include "logconn/job.hpp"
#include "logconn/torsion.hpp"
