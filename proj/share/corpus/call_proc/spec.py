def call_proc(old, pid):
    cond = z3.And(
        z3.And(pid > 0, pid < dt.NPROC),
        old.procs[pid].state == dt.proc_state.PROC_RUNNABLE,
        z3.Implies(old.procs[pid].ipc_from != 0,
                   old.procs[pid].ipc_from == old.current))

    new = old.copy()
    new.procs[pid].state = dt.proc_state.PROC_RUNNING
    new.procs[pid].ipc_from = old.current
    return cond, util.If(cond, new, old)
