int sys_set_runnable(pid_t pid) {
    struct proc *proc;

    if (!is_pid_valid(pid))
        return -ESRCH;
    proc = get_proc(pid);
    if (proc->ppid != current)
        return -EACCES;
    if (proc->state != PROC_EMBRYO)
        return -EINVAL;

    proc->state = PROC_RUNNABLE;
    proc_ready_add(proc);
    return 0;
}
