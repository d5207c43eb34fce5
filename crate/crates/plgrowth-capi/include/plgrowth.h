#ifndef PLGROWTH_H
#define PLGROWTH_H

/* Generated by cbindgen; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  PLG_STATUS_OK = 0,
  PLG_STATUS_NULL_POINTER = 1,
  PLG_STATUS_INVALID_ARGUMENT = 2,
  PLG_STATUS_NON_CONVERGENCE = 3,
  PLG_STATUS_EMPTY_REGION = 4,
  PLG_STATUS_INTERNAL = 5,
} PlgStatus;

/**
 * Opaque convex domain handle.
 */
typedef struct PlgDomain PlgDomain;

/**
 * Opaque nodal field handle.
 */
typedef struct PlgField PlgField;

/**
 * Opaque grid handle.
 */
typedef struct PlgGrid PlgGrid;

/**
 * Solve statistics mirrored into C.
 */
typedef struct {
  uint64_t iterations;
  double final_residual;
  double energy;
  bool converged;
} PlgSolveStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *plg_version(void);

/**
 * θ = 1 − e^{−C·κ₀^{1/n}}.
 */
PlgStatus plg_theta(uint32_t n, double kappa0, double c, double *out_theta);

/**
 * α = −log₄(1 − e^{−C·κ₀^{1/n}}).
 */
PlgStatus plg_alpha(uint32_t n, double kappa0, double c, double *out_alpha);

/**
 * C = −κ₀^{−1/n}·ln(1 − θ_emp).
 */
PlgStatus plg_calibrate_c(double theta_emp, uint32_t n, double kappa0, double *out_c);

/**
 * Open half-plane { q : n·q > offset } with anchor (ax, ay) on its line.
 *
 * # Safety
 * `out_domain` must point to writable storage for one pointer.
 */
PlgStatus plg_domain_half_plane(double normal_x,
                                double normal_y,
                                double offset,
                                double anchor_x,
                                double anchor_y,
                                PlgDomain **out_domain);

/**
 * Convex sector of the given opening (radians, at most π) about the
 * bisector angle, anchored on its boundary.
 *
 * # Safety
 * `out_domain` must point to writable storage for one pointer.
 */
PlgStatus plg_domain_sector(double vertex_x,
                            double vertex_y,
                            double bisector,
                            double opening,
                            double anchor_x,
                            double anchor_y,
                            PlgDomain **out_domain);

/**
 * # Safety
 * `domain` must have been produced by a `plg_domain_*` constructor and not
 * freed before; NULL is ignored.
 */
void plg_domain_free(PlgDomain *domain);

/**
 * Membership test for the open set.
 *
 * # Safety
 * `domain` must be a live handle; `out_inside` writable.
 */
PlgStatus plg_domain_contains(const PlgDomain *domain, double x, double y, bool *out_inside);

/**
 * Area ratio |D ∩ B(x₀,r)| / |B(x₀,r)|; `out_std_error` receives 0 for
 * closed forms and the sampling proxy otherwise.
 *
 * # Safety
 * `domain` must be a live handle; out-pointers writable.
 */
PlgStatus plg_domain_density_ratio(const PlgDomain *domain,
                                   double x0_x,
                                   double x0_y,
                                   double r,
                                   uint64_t samples,
                                   double *out_value,
                                   double *out_std_error);

/**
 * κ₀ over the given radii; `out_exact` reports whether the value is a
 * closed form (true) or a finite-radius lower estimate (false).
 *
 * # Safety
 * `domain` live; `radii` must point to `radii_len` readable doubles;
 * out-pointers writable.
 */
PlgStatus plg_domain_kappa0(const PlgDomain *domain,
                            double x0_x,
                            double x0_y,
                            const double *radii,
                            uintptr_t radii_len,
                            uint64_t samples,
                            double *out_value,
                            bool *out_exact);

/**
 * Discretizes D ∩ B(x₀, R); spacing must be at most R/16.
 *
 * # Safety
 * `domain` live; `out_grid` writable.
 */
PlgStatus plg_grid_build(const PlgDomain *domain,
                         double x0_x,
                         double x0_y,
                         double radius,
                         double spacing,
                         PlgGrid **out_grid);

/**
 * # Safety
 * `grid` must be a live handle; NULL is ignored.
 */
void plg_grid_free(PlgGrid *grid);

/**
 * Node counts per axis.
 *
 * # Safety
 * `grid` live; out-pointers writable.
 */
PlgStatus plg_grid_size(const PlgGrid *grid, uintptr_t *out_nx, uintptr_t *out_ny);

/**
 * Minimizes the discrete p-Dirichlet energy against boundary data read
 * from a full nx·ny row-major array (only lateral and outer-arc entries
 * are used). reg < 0 selects the spacing² default.
 *
 * # Safety
 * `grid` live; `boundary_values` must point to `n_values` readable
 * doubles; out-pointers writable.
 */
PlgStatus plg_solve_p(const PlgGrid *grid,
                      const double *boundary_values,
                      uintptr_t n_values,
                      double p,
                      double reg,
                      double tol,
                      uint64_t max_iter,
                      PlgField **out_field,
                      PlgSolveStats *out_stats);

/**
 * Iterates the ∞-harmonic midpoint scheme to a fixed point; same boundary
 * conventions as `plg_solve_p`.
 *
 * # Safety
 * As for `plg_solve_p`.
 */
PlgStatus plg_solve_inf(const PlgGrid *grid,
                        const double *boundary_values,
                        uintptr_t n_values,
                        double tol,
                        uint64_t max_iter,
                        uintptr_t stencil_radius,
                        PlgField **out_field,
                        PlgSolveStats *out_stats);

/**
 * # Safety
 * `field` must be a live handle; NULL is ignored.
 */
void plg_field_free(PlgField *field);

/**
 * Nodal value at (i, j); NaN at exterior nodes.
 *
 * # Safety
 * `field` live; `out_value` writable.
 */
PlgStatus plg_field_value(const PlgField *field, uintptr_t i, uintptr_t j, double *out_value);

/**
 * sup of the field over the value-carrying nodes of B((x, y), r).
 *
 * # Safety
 * `field` live; `out_sup` writable.
 */
PlgStatus plg_field_sup_on_ball(const PlgField *field,
                                double x,
                                double y,
                                double r,
                                double *out_sup);

/**
 * Least-squares growth exponent of log M(r) against log r over dyadic
 * radii (three or more, ratio 2 or 4, within R/4).
 *
 * # Safety
 * `field` live; `radii` readable for `radii_len` doubles; `out_alpha`
 * writable.
 */
PlgStatus plg_field_growth_alpha(const PlgField *field,
                                 double x0_x,
                                 double x0_y,
                                 const double *radii,
                                 uintptr_t radii_len,
                                 double *out_alpha);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PLGROWTH_H */
