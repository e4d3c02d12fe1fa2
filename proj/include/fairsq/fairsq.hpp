#pragma once

#include "fairsq/dsl/parser.hpp"
#include "fairsq/dsl/printer.hpp"
#include "fairsq/dsl/validate.hpp"
#include "fairsq/certificate.hpp"
#include "fairsq/fairness.hpp"
#include "fairsq/gaussian.hpp"
#include "fairsq/interpreter.hpp"
#include "fairsq/mc_oracle.hpp"
#include "fairsq/regions.hpp"
#include "fairsq/report.hpp"
#include "fairsq/symexec.hpp"
#include "fairsq/volume.hpp"
