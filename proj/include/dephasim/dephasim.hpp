#pragma once

#include "dephasim/closed_form.hpp"
#include "dephasim/ensemble.hpp"
#include "dephasim/errors.hpp"
#include "dephasim/fock_oracle.hpp"
#include "dephasim/io.hpp"
#include "dephasim/types.hpp"
