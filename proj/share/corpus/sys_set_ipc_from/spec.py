def sys_set_ipc_from(old, pid):
    cond = z3.Or(
        z3.And(pid > 0, pid < dt.NPROC),
        pid == 0)

    new = old.copy()
    new.procs[old.current].ipc_from = pid
    return cond, util.If(cond, new, old)
