#ifndef ABSSLICE_H
#define ABSSLICE_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define ASL_API __declspec(dllexport)
#else
#define ASL_API __attribute__((visibility("default")))
#endif

typedef struct asl_program asl_program;
typedef struct asl_criterion asl_criterion;

typedef enum {
    ASL_OK = 0,
    ASL_ERR_PARSE = 1,     /* malformed program, criterion, expression or agreement */
    ASL_ERR_ARG = 2,       /* null pointer, unknown domain or variable, unsupported criterion */
    ASL_ERR_INTERNAL = 3
} asl_status;

typedef enum { ASL_EQUIVALENT = 0, ASL_COUNTEREXAMPLE = 1, ASL_INCONCLUSIVE = 2 } asl_verdict;

typedef struct {
    int bound;                /* integer inputs range over [-bound, bound] */
    unsigned long step_limit; /* per execution */
} asl_options;

/* bound 4, step limit 10000 */
ASL_API void asl_options_init(asl_options* opt);

/* Message of the last failed call on this thread ("" if none). */
ASL_API const char* asl_last_error(void);
ASL_API const char* asl_version(void);
/* Strings returned through char** out parameters are owned by the caller. */
ASL_API void asl_string_free(char* s);

ASL_API asl_status asl_program_parse(const char* text, asl_program** out);
ASL_API void asl_program_free(asl_program* p);
ASL_API asl_status asl_program_print(const asl_program* p, char** out);

ASL_API asl_status asl_criterion_parse(const char* text, asl_criterion** out);
ASL_API void asl_criterion_free(asl_criterion* c);

/* Trajectory of p from the memory "x=1, y=2" (NULL: all defaults). */
ASL_API asl_status asl_run(const asl_program* p, const char* memory, const asl_options* opt, char** out);
/* Invariants before each line, numeric variables in domain, references in ref_domain (NULL: nullcyc). */
ASL_API asl_status asl_absint(const asl_program* p, const char* domain, const char* ref_domain, char** out);
/* Relevant variables of expr for the property domain; target (NULL: all) gets a witness line. */
ASL_API asl_status asl_deps(const char* expr, const char* domain, const char* eta, const char* target,
                            const asl_options* opt, char** out);
/* Simplest refinement of domain on which expr does not depend on vars (comma separated). */
ASL_API asl_status asl_edep(const char* expr, const char* domain, const char* vars, char** out);
ASL_API asl_status asl_pdg(const asl_program* p, int semantic, int dot, const asl_options* opt, char** out);
/* Listing annotated with the agreements propagated back from agreement; beta may be NULL. */
ASL_API asl_status asl_label(const asl_program* p, const char* agreement, const char* beta, char** out);
/* Sliced listing and JSON report; verdict receives the re-verification outcome. */
ASL_API asl_status asl_slice(const asl_program* p, const asl_criterion* c, int concrete, const asl_options* opt,
                             char** listing, char** report, asl_verdict* verdict);
/* Whether q is a slice of p for c; out gets a description (witness on counterexample). */
ASL_API asl_status asl_check(const asl_program* p, const asl_program* q, const asl_criterion* c,
                             const asl_options* opt, asl_verdict* verdict, char** out);
ASL_API asl_status asl_subsumes(const asl_criterion* c1, const asl_criterion* c2, const asl_program* p,
                                const asl_options* opt, int* result);

#ifdef __cplusplus
}
#endif

#endif
